use std::io::Write;

use super::WalkPath;
use crate::error::Result;

/// CSV with header `replicate,jump_index,time,state`; jump index 0 is the
/// start of the path at time 0.
pub fn write_paths_csv<W: Write>(mut out: W, paths: &[WalkPath]) -> Result<()> {
    writeln!(out, "replicate,jump_index,time,state")?;
    for (r, p) in paths.iter().enumerate() {
        for (k, (&t, &s)) in p.times.iter().zip(&p.states).enumerate() {
            writeln!(out, "{r},{k},{t:.17e},{s}")?;
        }
    }
    Ok(())
}

pub fn paths_csv(paths: &[WalkPath]) -> String {
    let mut buf = Vec::new();
    write_paths_csv(&mut buf, paths).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::StopReason;

    #[test]
    fn csv_layout() {
        let p = WalkPath {
            times: vec![0.0, 0.5],
            states: vec![2, 3],
            end_time: 1.0,
            stop: StopReason::Horizon,
        };
        let csv = paths_csv(&[p]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "replicate,jump_index,time,state");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("0,1,5.0"));
        assert!(lines[2].ends_with(",3"));
    }
}
