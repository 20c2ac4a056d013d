use crate::crystal::{DbReport, Structure};
use crate::hyperfine::{GeometrySolution, ScanRow};
use crate::kinetics::{RateFlag, SweepRow};

/// Scientific notation with `digits` significant digits.
pub fn sci(x: f64, digits: usize) -> String {
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    if x == 0.0 {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("atom_index,element,isotope,a_MHz,b_MHz,flagged\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.atom_index,
            r.element,
            r.isotope,
            sci(r.a, 9),
            sci(r.b, 9),
            r.flagged
        ));
    }
    out
}

pub fn trace_csv(trace: &[(f64, f64)]) -> String {
    let mut out = String::from("tau_us,E\n");
    for (tau, e) in trace {
        out.push_str(&format!("{},{}\n", sci(*tau, 9), sci(*e, 9)));
    }
    out
}

/// One rate column per barrier; clamped rates are listed in the last column.
pub fn sweep_csv(barriers: &[f64], rows: &[Vec<SweepRow>]) -> String {
    let mut out = String::from("T_K,T_C");
    if barriers.len() == 1 {
        out.push_str(",rate_per_s");
    } else {
        for e in barriers {
            out.push_str(&format!(",rate_per_s@{e}eV"));
        }
    }
    out.push_str(",clamped\n");
    let n = rows.first().map_or(0, |r| r.len());
    for i in 0..n {
        let t_k = rows[0][i].t_k;
        out.push_str(&format!(
            "{},{}",
            sci(t_k, 6),
            sci(t_k - crate::constants::CELSIUS_OFFSET, 6)
        ));
        let mut clamped = Vec::new();
        for (e, series) in barriers.iter().zip(rows) {
            let row = series[i];
            out.push_str(&format!(",{}", sci(row.rate, 6)));
            if row.flag != RateFlag::Ok {
                clamped.push(format!("{}@{e}eV", row.flag.label()));
            }
        }
        out.push_str(&format!(",{}\n", clamped.join(";")));
    }
    out
}

pub fn dbs_csv(s: &Structure, report: &DbReport) -> String {
    let mut out = String::from("atom_index,element,role,db_count,dir_x,dir_y,dir_z\n");
    for e in &report.entries {
        let d = e.direction.unwrap_or([0.0; 3]);
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6}\n",
            e.atom,
            s.atoms[e.atom].species,
            s.atoms[e.atom].role.tag(),
            e.db_count,
            d[0],
            d[1],
            d[2]
        ));
    }
    out
}

pub fn fit_csv(solutions: &[GeometrySolution]) -> String {
    let mut out = String::from("r_A,theta_deg,residual_MHz\n");
    for s in solutions {
        out.push_str(&format!("{},{},{}\n", sci(s.r, 9), sci(s.theta, 9), sci(s.residual, 3)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn significant_digits() {
        assert_eq!(sci(3.430959e8, 6), "3.43096e8");
        assert_eq!(sci(-0.0, 6), "0.00000e0");
        assert_eq!(sci(1.0, 1), "1e0");
        assert_eq!(sci(873.15, 9), "8.73150000e2");
    }
}
