//! CSV and JSON artifacts. Floats carry 17 significant digits, lines end in LF.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use frontsys_core::solver::MmsTable;
use frontsys_core::Trajectory;
use serde::Serialize;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn front_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,s,s_prime,sup_u,sup_v,clamp_events_cumulative\n");
    for k in 0..traj.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(traj.times[k]),
            num(traj.fronts[k]),
            num(traj.front_speeds[k]),
            num(traj.sup_u[k]),
            num(traj.sup_v[k]),
            traj.clamp_cumulative[k]
        );
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,y,x,u,v\n");
    for snap in &traj.snapshots {
        for i in 0..=snap.n() {
            let y = snap.y(i);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(snap.t),
                num(y),
                num(y * snap.s),
                num(snap.w[i]),
                num(snap.z[i])
            );
        }
    }
    out
}

pub fn convergence_csv(table: &MmsTable) -> String {
    let mut out = String::from("N,dt,err_u,err_v,err_s,order_u\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.n,
            num(row.dt),
            num(row.err_u),
            num(row.err_v),
            num(row.err_s),
            opt(row.order_u)
        );
    }
    out
}

/// One regime-map cell; `error` is set when the cell could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRow {
    pub p: f64,
    pub q: f64,
    pub amplitude: f64,
    pub verdict: String,
    pub status: String,
    pub t_reached: Option<f64>,
    pub sup_end: Option<f64>,
    pub eps: Option<f64>,
    pub error: String,
}

pub fn regime_csv(rows: &[RegimeRow]) -> String {
    let mut out = String::from("p,q,amplitude,verdict,status,t_reached,sup_end,eps_certified,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.p),
            num(r.q),
            num(r.amplitude),
            r.verdict,
            r.status,
            opt(r.t_reached),
            opt(r.sup_end),
            opt(r.eps),
            r.error.replace([',', '\n'], ";")
        );
    }
    out
}

/// Per-level scalar histories of a cascade, one block per level.
pub fn levels_csv(levels: &[(Option<u32>, f64, &Trajectory)]) -> String {
    let mut out = String::from("n,shift,t,s,s_prime,sup_u,sup_v\n");
    for (n, shift, traj) in levels {
        let n = n.map(|n| n.to_string()).unwrap_or_default();
        for k in 0..traj.len() {
            let _ = writeln!(
                out,
                "{n},{},{},{},{},{},{}",
                num(*shift),
                num(traj.times[k]),
                num(traj.fronts[k]),
                num(traj.front_speeds[k]),
                num(traj.sup_u[k]),
                num(traj.sup_v[k])
            );
        }
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5e-7, f64::MIN_POSITIVE] {
            let text = num(v);
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{text}");
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn regime_rows_escape_separators() {
        let row = RegimeRow {
            p: 1.0,
            q: 2.0,
            amplitude: 0.5,
            verdict: "Failed".into(),
            status: String::new(),
            t_reached: None,
            sup_end: None,
            eps: None,
            error: "a, b\nc".into(),
        };
        let csv = regime_csv(&[row]);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 9);
        assert!(!csv.contains('\r'));
    }
}
