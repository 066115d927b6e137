//! CSV files written by the commands. All files use CRLF line endings and
//! shortest round-trip formatting for reals, so identical runs produce
//! identical bytes.

use std::io::Write;

use syncnet_core::dynamics::Trajectory;
use syncnet_core::experiments::{Series, SweepRow};

use crate::config::CsvForm;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

fn real(v: f64) -> String {
    v.to_string()
}

/// `t,x_1_1,…,x_n_m` (wide) or `t,node,comp,value` (long), 1-based indices.
pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory, form: CsvForm) -> csv::Result<()> {
    let mut w = writer(out);
    let m = traj.node_dim();
    let n = traj.dim() / m.max(1);
    match form {
        CsvForm::Wide => {
            let mut header = vec!["t".to_string()];
            for i in 1..=n {
                for k in 1..=m {
                    header.push(format!("x_{i}_{k}"));
                }
            }
            w.write_record(&header)?;
            for (t, x) in traj.times().iter().zip(traj.states()) {
                let mut rec = vec![real(*t)];
                rec.extend(x.iter().map(|v| real(*v)));
                w.write_record(&rec)?;
            }
        }
        CsvForm::Long => {
            w.write_record(["t", "node", "comp", "value"])?;
            for (t, x) in traj.times().iter().zip(traj.states()) {
                for (idx, v) in x.iter().enumerate() {
                    let node = (idx / m + 1).to_string();
                    let comp = (idx % m + 1).to_string();
                    w.write_record([real(*t), node, comp, real(*v)])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Two-column series with header `t,<name>`.
pub fn write_series<W: Write>(out: W, series: &Series, name: &str) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["t", name])?;
    for (t, v) in series.t.iter().zip(&series.v) {
        w.write_record([real(*t), real(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `beta,alpha_c,rho_c,bisection_width,evaluations`; empty fields for grid
/// points without a threshold.
pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["beta", "alpha_c", "rho_c", "bisection_width", "evaluations"])?;
    for row in rows {
        match &row.result {
            Some(r) => w.write_record([
                real(row.beta),
                real(r.alpha_c),
                real(r.rho_c),
                real(r.bisection_width),
                r.evaluations.to_string(),
            ])?,
            None => w.write_record([real(row.beta), String::new(), String::new(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use syncnet_core::dynamics::{integrate, Isolated, IntegrationSettings, LinearField, Method};
    use syncnet_core::experiments::{Bracket, CriticalCouplingResult};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn series_layout() {
        let mut s = Series::default();
        s.push(0.0, 1.5);
        s.push(0.5, 0.25);
        assert_eq!(text(|b| write_series(b, &s, "spread")), "t,spread\r\n0,1.5\r\n0.5,0.25\r\n");
    }

    #[test]
    fn sweep_gaps_are_blank() {
        let r = CriticalCouplingResult {
            beta: 0.5,
            alpha_c: 4.0,
            rho_c: 2.0,
            rho_c_gamma: None,
            bisection_width: 0.001,
            evaluations: 12,
            bracket: Bracket { lo: 3.9995, hi: 4.0005 },
            lo_edge: false,
            spot_check: true,
            restarts: 0,
        };
        let rows = [
            SweepRow { beta: 0.5, result: Some(r), gap: None },
            SweepRow { beta: 1.0, result: None, gap: Some("none".into()) },
        ];
        assert_eq!(
            text(|b| write_sweep(b, &rows)),
            "beta,alpha_c,rho_c,bisection_width,evaluations\r\n0.5,4,2,0.001,12\r\n1,,,,\r\n"
        );
    }

    #[test]
    fn trajectory_forms() {
        let field = LinearField::scalar(2, -1.0).unwrap();
        let settings = IntegrationSettings::new(0.5, Method::Rk4);
        let traj = integrate(&Isolated(&field), &[1.0, 2.0], 0.0, 0.5, &settings).unwrap();
        let wide = text(|b| write_trajectory(b, &traj, CsvForm::Wide));
        let mut lines = wide.lines();
        assert_eq!(lines.next(), Some("t,x_1_1,x_1_2"));
        assert_eq!(lines.next(), Some("0,1,2"));
        assert_eq!(wide.lines().count(), 3);
        let long = text(|b| write_trajectory(b, &traj, CsvForm::Long));
        assert!(long.starts_with("t,node,comp,value\r\n0,1,1,1\r\n0,1,2,2\r\n"));
        assert_eq!(long.lines().count(), 5);
    }
}
