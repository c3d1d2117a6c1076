use std::fmt::Write as _;

/// One outer iterate `psi_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub n: usize,
    /// Killing-projected norm of the energy gradient at `psi_n`.
    pub residual: f64,
    /// `H1` norm of `psi_n - psi_{n-1}`.
    pub increment: f64,
    pub energy: f64,
    /// Doping coefficients of the solve that produced `psi_n`.
    pub doping: Vec<f64>,
    pub psi_sup: f64,
    pub cg_iterations: usize,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationReport {
    pub initial_residual: f64,
    pub initial_energy: f64,
    pub rows: Vec<IterationRow>,
    pub converged: bool,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn last(&self) -> Option<&IterationRow> {
        self.rows.last()
    }

    /// `increment_n / increment_{n-1}` for `n >= 2`, in order.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].increment / w[0].increment).collect()
    }

    pub fn max_doping(&self) -> f64 {
        self.last()
            .map(|r| r.doping.iter().fold(0.0_f64, |m, c| m.max(c.abs())))
            .unwrap_or(0.0)
    }

    /// `n,residual,increment,energy,c_1..c_N`, one row per iterate, floats in
    /// shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let n_dope = self.rows.first().map(|r| r.doping.len()).unwrap_or(0);
        let mut out = String::from("n,residual,increment,energy");
        for a in 1..=n_dope {
            let _ = write!(out, ",c_{a}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{:e},{:e},{:e}", r.n, r.residual, r.increment, r.energy);
            for c in &r.doping {
                let _ = write!(out, ",{c:e}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, increment: f64) -> IterationRow {
        IterationRow {
            n,
            residual: 0.1,
            increment,
            energy: 1.0 / 3.0,
            doping: vec![1e-9, -2e-9, 0.0],
            psi_sup: 0.0,
            cg_iterations: 0,
            halvings: 0,
        }
    }

    #[test]
    fn csv_round_trips_floats() {
        let r = IterationReport {
            rows: vec![row(1, 1.0), row(2, 0.25)],
            ..Default::default()
        };
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,residual,increment,energy,c_1,c_2,c_3"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[3].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(r.contraction_ratios(), vec![0.25]);
        assert_eq!(r.max_doping(), 2e-9);
    }
}
