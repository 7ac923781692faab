//! DOT dump of an ADD for debugging: solid edges are true branches, dotted
//! edges are false branches, terminals are boxes.

use std::io::{self, Write};

use super::{AddManager, AddRef, NodeId};

pub fn write_dot(mgr: &AddManager, f: AddRef, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "digraph add {{")?;
    let mut seen = Vec::new();
    let mut stack = vec![f.root()];
    while let Some(id) = stack.pop() {
        if seen.contains(&id) {
            continue;
        }
        seen.push(id);
        if let Some((var, lo, hi)) = mgr.node_children(id) {
            writeln!(w, "  {} [label=\"{var}\"];", name(id))?;
            writeln!(w, "  {} -> {} [label=\"1\", style=solid];", name(id), name(hi))?;
            writeln!(w, "  {} -> {} [label=\"0\", style=dotted];", name(id), name(lo))?;
            stack.push(hi);
            stack.push(lo);
        } else {
            let value = mgr.terminal_of(id).expect("terminal");
            writeln!(w, "  {} [label=\"{value}\", shape=box];", name(id))?;
        }
    }
    writeln!(w, "}}")
}

fn name(id: NodeId) -> String {
    if id.is_terminal() {
        format!("t{}", id.index())
    } else {
        format!("n{}", id.index())
    }
}
