//! Text formats: edge lists, node-state files and the CSV outputs.
//!
//! Every CSV starts with `#`-prefixed comment lines followed by a header row.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeState, SimState};
use crate::model::EventRecord;
use crate::observables::Trajectory;

pub const TRAJECTORY_HEADER: &str = "replica,time,prevalence,mean_degree";
pub const EVENT_HEADER: &str = "replica,time,kind,node_a,node_b";
pub const BENCH_HEADER: &str = "algorithm,graph,n,run,accepted_steps,wall_time_ns,time_per_step_ns,skipped";
pub const SWEEP_HEADER: &str = "beta_prime,a_prime,b,replica,wave_count";

pub fn write_comments<W: Write + ?Sized>(out: &mut W, lines: &[String]) -> Result<()> {
    for line in lines {
        for part in line.lines() {
            writeln!(out, "# {part}")?;
        }
    }
    Ok(())
}

/// `n=<count>` then one `u v` line per edge (sorted, zero-based).
pub fn write_edge_list<W: Write>(out: &mut W, state: &SimState) -> Result<()> {
    writeln!(out, "n={}", state.n())?;
    for e in state.edges().sorted() {
        writeln!(out, "{} {}", e.a(), e.b())?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads the edge-list format; blank lines and `#` comments are skipped.
/// All nodes start susceptible.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<SimState> {
    let mut state: Option<SimState> = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &mut state {
            None => {
                let n = line
                    .strip_prefix("n=")
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .ok_or_else(|| parse_err(line_no, format!("expected header 'n=<count>', got '{line}'")))?;
                state = Some(SimState::new(n));
            }
            Some(s) => {
                let mut parts = line.split_whitespace();
                let mut node = || -> Result<NodeId> {
                    parts
                        .next()
                        .and_then(|p| p.parse::<NodeId>().ok())
                        .ok_or_else(|| parse_err(line_no, format!("expected 'u v', got '{line}'")))
                };
                let (u, v) = (node()?, node()?);
                s.add_edge(u, v).map_err(|e| parse_err(line_no, e.to_string()))?;
            }
        }
    }
    state.ok_or_else(|| parse_err(0, "missing 'n=<count>' header"))
}

/// One `v S|I` line per node.
pub fn write_node_states<W: Write>(out: &mut W, state: &SimState) -> Result<()> {
    for (v, s) in state.states().iter().enumerate() {
        writeln!(out, "{v} {}", s.symbol())?;
    }
    Ok(())
}

/// Applies a node-state file to `state`; unlisted nodes keep their state.
pub fn read_node_states<R: BufRead>(input: R, state: &mut SimState) -> Result<()> {
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let v = parts
            .next()
            .and_then(|p| p.parse::<NodeId>().ok())
            .ok_or_else(|| parse_err(line_no, format!("expected 'v S|I', got '{line}'")))?;
        let s = match parts.next() {
            Some("S") => NodeState::Susceptible,
            Some("I") => NodeState::Infected,
            _ => return Err(parse_err(line_no, format!("expected state S or I in '{line}'"))),
        };
        state.set_node_state(v, s).map_err(|e| parse_err(line_no, e.to_string()))?;
    }
    Ok(())
}

pub fn write_trajectory_rows<W: Write + ?Sized>(out: &mut W, tr: &Trajectory) -> Result<()> {
    for ((t, p), d) in tr.grid.iter().zip(&tr.prevalence).zip(&tr.mean_degree) {
        writeln!(out, "{},{},{},{}", tr.replica, t, p, d)?;
    }
    Ok(())
}

pub fn write_event_row<W: Write + ?Sized>(out: &mut W, replica: usize, ev: &EventRecord) -> std::io::Result<()> {
    match ev.node_b {
        Some(b) => writeln!(out, "{},{},{},{},{}", replica, ev.t, ev.kind, ev.node_a, b),
        None => writeln!(out, "{},{},{},{},", replica, ev.t, ev.kind, ev.node_a),
    }
}

/// Parses trajectory CSV rows back, skipping comments and the header.
pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<Vec<(usize, f64, f64, f64)>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line == TRAJECTORY_HEADER || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || parse_err(idx + 1, format!("malformed trajectory row '{line}'"));
        if f.len() != 4 {
            return Err(bad());
        }
        rows.push((
            f[0].parse().map_err(|_| bad())?,
            f[1].parse().map_err(|_| bad())?,
            f[2].parse().map_err(|_| bad())?,
            f[3].parse().map_err(|_| bad())?,
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_erdos_renyi;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_list_round_trip() {
        let g = gen_erdos_renyi(40, 0.1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &g).unwrap();
        let back = read_edge_list(&buf[..]).unwrap();
        assert_eq!(back.n(), 40);
        assert_eq!(back.edges().sorted(), g.edges().sorted());
    }

    #[test]
    fn edge_list_errors() {
        assert!(read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(read_edge_list("n=3\n0 3\n".as_bytes()).is_err());
        assert!(read_edge_list("n=3\n1 1\n".as_bytes()).is_err());
        assert!(read_edge_list("n=3\n1\n".as_bytes()).is_err());
        let s = read_edge_list("# comment\nn=3\n\n2 0\n".as_bytes()).unwrap();
        assert!(s.has_edge(0, 2));
    }

    #[test]
    fn node_states_round_trip() {
        let mut s = SimState::new(4);
        s.set_node_state(2, NodeState::Infected).unwrap();
        let mut buf = Vec::new();
        write_node_states(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 S\n1 S\n2 I\n3 S\n");
        let mut t = SimState::new(4);
        read_node_states(&buf[..], &mut t).unwrap();
        assert_eq!(t.states(), s.states());
        assert!(read_node_states("0 X\n".as_bytes(), &mut t).is_err());
        assert!(read_node_states("9 I\n".as_bytes(), &mut t).is_err());
    }

    #[test]
    fn event_rows() {
        let mut buf = Vec::new();
        write_event_row(&mut buf, 2, &EventRecord::recovery(0.5, 3)).unwrap();
        write_event_row(&mut buf, 2, &EventRecord::connect(0.75, 4, 1)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,0.5,recovery,3,\n2,0.75,connect,1,4\n");
    }
}
