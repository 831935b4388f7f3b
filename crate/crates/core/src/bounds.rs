//! Closed-form approximation ratios of the robust greedy algorithms, the
//! greedy prefix and value-concentration bounds, and the grid of T2 ratios.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Which form of the T4 or T5 bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Backward-monotone form (`α = 1`), depends on `k`.
    A,
    /// `α`-backward-monotone form, constant in `k`.
    B,
}

/// A ratio together with the intermediate quantities of its formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Breakdown {
    pub value: f64,
    pub terms: Vec<(&'static str, f64)>,
}

fn check_constant(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidInput(format!("{name} = {x} must lie in (0, 1]")));
    }
    Ok(())
}

fn check_tau(k: usize, tau: usize) -> Result<()> {
    if tau == 0 || tau > k {
        return Err(Error::InvalidInput(format!("tau = {tau} must lie in 1..={k}")));
    }
    Ok(())
}

pub fn theorem1_breakdown(k: usize) -> Result<Breakdown> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k = {k} must be at least 2")));
    }
    let constant = (E - 1.0) / (2.0 * E);
    let x = ((k - 2) as f64 / (k - 1) as f64).exp();
    let second = (x - 1.0) / (2.0 * x - 1.0);
    Ok(Breakdown {
        value: constant.max(second),
        terms: vec![("constant", constant), ("second", second)],
    })
}

/// Contiguous robust greedy with `τ = 1`.
pub fn ratio_theorem1(k: usize) -> Result<f64> {
    Ok(theorem1_breakdown(k)?.value)
}

pub fn theorem2_breakdown(k: usize, tau: usize) -> Result<Breakdown> {
    check_tau(k, tau)?;
    let constant = (E - 1.0).powi(2) / (E * (2.0 * E - 1.0));
    let mut terms = vec![("constant", constant)];
    let mut value = constant;
    // The second term is only meaningful for a positive exponent.
    if k > 2 * tau {
        let b = (k as f64 - 2.0 * tau as f64) / (k - tau) as f64;
        let x = b.exp();
        let second = (E - 1.0) * (x - 1.0) / ((2.0 * E - 1.0) * x - (E - 1.0));
        terms.push(("b", b));
        terms.push(("second", second));
        value = value.max(second);
    }
    Ok(Breakdown { value, terms })
}

/// Contiguous robust greedy under removal of `τ` contiguous elements.
pub fn ratio_theorem2(k: usize, tau: usize) -> Result<f64> {
    Ok(theorem2_breakdown(k, tau)?.value)
}

/// Arbitrary robust greedy under removal of `τ` arbitrary elements.
pub fn ratio_theorem3(tau: usize) -> Result<f64> {
    if tau == 0 {
        return Err(Error::InvalidInput("tau must be at least 1".into()));
    }
    Ok((1.0 - 1.0 / E) / (1.0 + tau as f64))
}

pub fn theorem4_breakdown(k: usize, mu1: f64, mu2: f64, alpha: f64, variant: Variant) -> Result<Breakdown> {
    check_constant("mu1", mu1)?;
    check_constant("mu2", mu2)?;
    match variant {
        Variant::A => {
            if k <= 2 {
                return Err(Error::InvalidInput(format!("k = {k} must exceed 2")));
            }
            let a = mu1 * mu2 / (mu1 + 1.0);
            let b = mu1 * (k - 2) as f64 / (k - 1) as f64;
            let x = b.exp();
            Ok(Breakdown {
                value: a * (x - 1.0) / (x - a),
                terms: vec![("a", a), ("b", b)],
            })
        }
        Variant::B => {
            check_constant("alpha", alpha)?;
            let x = mu1.exp();
            Ok(Breakdown {
                value: alpha * alpha * mu1 * mu2 * (x - 1.0) / ((mu1 + alpha) * x),
                terms: vec![],
            })
        }
    }
}

/// Contiguous robust greedy with `τ = 1` under approximate axioms. Variant A ignores
/// `alpha`.
pub fn ratio_theorem4(k: usize, mu1: f64, mu2: f64, alpha: f64, variant: Variant) -> Result<f64> {
    Ok(theorem4_breakdown(k, mu1, mu2, alpha, variant)?.value)
}

pub fn theorem5_breakdown(k: usize, tau: usize, mu1: f64, mu2: f64, alpha: f64, variant: Variant) -> Result<Breakdown> {
    check_tau(k, tau)?;
    check_constant("mu1", mu1)?;
    check_constant("mu2", mu2)?;
    let x = mu1.exp();
    match variant {
        Variant::A => {
            if k <= 2 * tau {
                return Err(Error::InvalidInput(format!("k = {k} must exceed 2 tau = {}", 2 * tau)));
            }
            let a = mu1 * (1.0 - 1.0 / x);
            let b = mu1 * (k - 2 * tau) as f64 / (k - tau) as f64;
            let y = b.exp();
            Ok(Breakdown {
                value: a * mu2 * (y - 1.0) / ((a + 1.0) * y - a * mu2),
                terms: vec![("a", a), ("b", b)],
            })
        }
        Variant::B => {
            check_constant("alpha", alpha)?;
            Ok(Breakdown {
                value: alpha * alpha * mu1 * mu2 * (x - 1.0).powi(2) / (mu1 * x * (x - 1.0) + x * x),
                terms: vec![],
            })
        }
    }
}

/// Contiguous robust greedy under approximate axioms. Variant A
/// ignores `alpha`.
pub fn ratio_theorem5(k: usize, tau: usize, mu1: f64, mu2: f64, alpha: f64, variant: Variant) -> Result<f64> {
    Ok(theorem5_breakdown(k, tau, mu1, mu2, alpha, variant)?.value)
}

/// Arbitrary robust greedy under approximate axioms.
pub fn ratio_theorem6(tau: usize, mu1: f64, mu3: f64, alpha: f64) -> Result<f64> {
    if tau == 0 {
        return Err(Error::InvalidInput("tau must be at least 1".into()));
    }
    check_constant("mu1", mu1)?;
    check_constant("mu3", mu3)?;
    check_constant("alpha", alpha)?;
    let x = mu1.exp();
    Ok(alpha * alpha * mu1 * mu3 * (x - 1.0) / ((mu1 + alpha * tau as f64) * x))
}

/// Fraction of the optimum guaranteed by the first `i` SSG elements:
/// `α(1 - e^{-μ₁ i / k})`.
pub fn ssg_prefix_bound(i: usize, k: usize, mu1: f64, alpha: f64) -> Result<f64> {
    if i == 0 || i > k {
        return Err(Error::InvalidInput(format!("i = {i} must lie in 1..={k}")));
    }
    check_constant("mu1", mu1)?;
    check_constant("alpha", alpha)?;
    Ok(alpha * (1.0 - (-mu1 * i as f64 / k as f64).exp()))
}

/// Fraction of the optimum guaranteed by an SSG output whose prefix of
/// length `k - k'` already holds a `c` share of its value.
pub fn concentration_bound(k: usize, kprime: usize, c: f64, mu1: f64) -> Result<f64> {
    if kprime == 0 || kprime > k {
        return Err(Error::InvalidInput(format!("k' = {kprime} must lie in 1..={k}")));
    }
    check_constant("c", c)?;
    check_constant("mu1", mu1)?;
    let x = (mu1 * kprime as f64 / k as f64).exp();
    Ok((x - 1.0) / (x - c))
}

/// T2 ratios on a `τ × k` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Table2 {
    pub taus: Vec<usize>,
    pub ks: Vec<usize>,
    /// `values[row][col]` for `taus[row]`, `ks[col]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub tau: usize,
    pub k: usize,
    pub expected: f64,
    pub actual: f64,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round_ties_even() / 1000.0
}

/// `τ ∈ {2, 4, …, 20}` by `k ∈ {50, 52, …, 68}`, rounded to three decimals
/// (ties to even).
pub fn table2_grid() -> Table2 {
    let taus: Vec<usize> = (2..=20).step_by(2).collect();
    let ks: Vec<usize> = (50..=68).step_by(2).collect();
    let values = taus
        .iter()
        .map(|&tau| {
            ks.iter()
                .map(|&k| round3(ratio_theorem2(k, tau).expect("grid parameters are valid")))
                .collect()
        })
        .collect();
    Table2 { taus, ks, values }
}

impl Table2 {
    /// Header `tau,k1,k2,…`, then one row per `τ`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau");
        for k in &self.ks {
            out.push_str(&format!(",{k}"));
        }
        out.push('\n');
        for (tau, row) in self.taus.iter().zip(&self.values) {
            out.push_str(&tau.to_string());
            for v in row {
                out.push_str(&format!(",{v:.3}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Table2> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.records().enumerate();
        let err = |line: usize, m: &str| Error::parse(line, m);
        let num = |line: usize, s: &str| -> Result<f64> { s.parse().map_err(|_| err(line, &format!("bad number '{s}'"))) };
        let int = |line: usize, s: &str| -> Result<usize> { s.parse().map_err(|_| err(line, &format!("bad integer '{s}'"))) };
        let (_, header) = rows.next().ok_or_else(|| err(1, "empty table"))?;
        let header = header.map_err(|e| err(1, &e.to_string()))?;
        let ks = header.iter().skip(1).map(|s| int(1, s)).collect::<Result<Vec<_>>>()?;
        let mut taus = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rows {
            let line = i + 1;
            let rec = rec.map_err(|e| err(line, &e.to_string()))?;
            if rec.len() != ks.len() + 1 {
                return Err(err(line, &format!("expected {} fields, found {}", ks.len() + 1, rec.len())));
            }
            taus.push(int(line, &rec[0])?);
            values.push(rec.iter().skip(1).map(|s| num(line, s)).collect::<Result<Vec<_>>>()?);
        }
        Ok(Table2 { taus, ks, values })
    }

    pub fn get(&self, tau: usize, k: usize) -> Option<f64> {
        let r = self.taus.iter().position(|&t| t == tau)?;
        let c = self.ks.iter().position(|&x| x == k)?;
        Some(self.values[r][c])
    }

    /// Cells of `expected` that are missing here or differ by more than
    /// `tol`.
    pub fn compare(&self, expected: &Table2, tol: f64) -> Vec<Mismatch> {
        let mut out = Vec::new();
        for (r, &tau) in expected.taus.iter().enumerate() {
            for (c, &k) in expected.ks.iter().enumerate() {
                let want = expected.values[r][c];
                let got = self.get(tau, k).unwrap_or(f64::NAN);
                // A missing cell is NaN and never within tolerance.
                let within = (got - want).abs() <= tol;
                if !within {
                    out.push(Mismatch {
                        tau,
                        k,
                        expected: want,
                        actual: got,
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn theorem1_values() {
        let c = (E - 1.0) / (2.0 * E);
        assert!(close(c, 0.316, 5e-4));
        assert_eq!(ratio_theorem1(3).unwrap(), c);
        let b = theorem1_breakdown(3).unwrap();
        assert!(close(b.terms[1].1, 0.2824, 1e-4));
        assert!(close(ratio_theorem1(4).unwrap(), 0.3273, 1e-4));
        assert!(ratio_theorem1(1).is_err());
    }

    #[test]
    fn theorem2_values() {
        assert!(close(ratio_theorem2(50, 2).unwrap(), 0.28, 5e-3));
        assert_eq!(round3(ratio_theorem2(58, 10).unwrap()), 0.257);
        assert_eq!(round3(ratio_theorem2(68, 20).unwrap()), 0.245);
        let c = (E - 1.0).powi(2) / (E * (2.0 * E - 1.0));
        assert_eq!(ratio_theorem2(3, 3).unwrap(), c);
        assert_eq!(ratio_theorem2(3, 2).unwrap(), c);
        assert_eq!(ratio_theorem2(4, 2).unwrap(), c);
        assert!(ratio_theorem2(3, 0).is_err());
        assert!(ratio_theorem2(3, 4).is_err());
    }

    #[test]
    fn theorem3_values() {
        assert!(close(ratio_theorem3(1).unwrap(), 0.3161, 1e-4));
        assert!(close(ratio_theorem3(1).unwrap(), (E - 1.0) / (2.0 * E), 1e-15));
        assert!(ratio_theorem3(2).unwrap() < ratio_theorem3(1).unwrap());
        assert!(ratio_theorem3(0).is_err());
    }

    #[test]
    fn approximate_theorems() {
        assert!(close(ratio_theorem4(5, 1.0, 1.0, 1.0, Variant::B).unwrap(), (E - 1.0) / (2.0 * E), 1e-12));
        let far = ratio_theorem4(1_000_000, 1.0, 1.0, 1.0, Variant::A).unwrap();
        assert!(close(far, 0.5 * (E - 1.0) / (E - 0.5), 1e-6));
        let half = ratio_theorem4(5, 1.0, 0.5, 1.0, Variant::B).unwrap();
        assert!(close(half * 2.0, ratio_theorem4(5, 1.0, 1.0, 1.0, Variant::B).unwrap(), 1e-12));
        assert!(ratio_theorem4(2, 1.0, 1.0, 1.0, Variant::A).is_err());
        assert!(ratio_theorem4(5, 0.0, 1.0, 1.0, Variant::B).is_err());
        assert!(ratio_theorem4(5, 1.0, 1.0, 1.5, Variant::B).is_err());

        let t5a = ratio_theorem5(50, 2, 1.0, 1.0, 1.0, Variant::A).unwrap();
        assert!(close(t5a, theorem2_breakdown(50, 2).unwrap().terms[2].1, 1e-12));
        assert!(ratio_theorem5(10, 2, 0.9, 0.9, 1.0, Variant::A).unwrap() > ratio_theorem5(10, 3, 0.9, 0.9, 1.0, Variant::A).unwrap());
        assert!(ratio_theorem5(4, 2, 1.0, 1.0, 1.0, Variant::A).is_err());

        let t6 = ratio_theorem6(1, 0.5, 0.7, 0.5).unwrap();
        let x = 0.5f64.exp();
        assert!(close(t6, 0.25 * 0.5 * 0.7 * (x - 1.0) / ((0.5 + 0.5) * x), 1e-15));
    }

    #[test]
    fn prefix_and_concentration() {
        assert!(close(ssg_prefix_bound(10, 10, 1.0, 1.0).unwrap(), 1.0 - 1.0 / E, 1e-15));
        assert!(close(ssg_prefix_bound(5, 10, 1.0, 1.0).unwrap(), 0.3935, 1e-4));
        assert!(close(ssg_prefix_bound(10, 10, 1.0, 0.6).unwrap(), 0.379, 5e-4));
        assert!(ssg_prefix_bound(0, 10, 1.0, 1.0).is_err());
        assert!(close(concentration_bound(20, 19, 0.5, 1.0).unwrap(), 0.76, 5e-3));
        assert!(close(concentration_bound(20, 19, 0.05, 1.0).unwrap(), 0.62, 1e-2));
        assert_eq!(concentration_bound(20, 7, 1.0, 0.8).unwrap(), 1.0);
        assert!(concentration_bound(20, 0, 0.5, 1.0).is_err());
        assert!(concentration_bound(20, 3, 0.0, 1.0).is_err());
    }

    #[test]
    fn grid_shape_and_anchors() {
        let t = table2_grid();
        assert_eq!(t.taus.len(), 10);
        assert_eq!(t.ks.len(), 10);
        assert_eq!(t.get(2, 50), Some(0.28));
        assert_eq!(t.get(12, 60), Some(0.25));
        assert!(t.values.iter().flatten().all(|&v| v >= 0.245));
    }

    #[test]
    fn grid_csv_round_trip() {
        let t = table2_grid();
        let csv = t.to_csv();
        assert!(csv.starts_with("tau,50,52,"));
        assert!(csv.lines().nth(1).unwrap().starts_with("2,0.280,"));
        let back = Table2::from_csv(&csv).unwrap();
        assert_eq!(back, t);
        assert!(t.compare(&back, 5e-4).is_empty());
        let mut bad = back.clone();
        bad.values[3][4] += 0.01;
        let m = t.compare(&bad, 5e-4);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].tau, m[0].k), (8, 58));
        assert!(Table2::from_csv("tau,50\n2,x\n").is_err());
    }
}
