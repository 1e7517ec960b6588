//! Gate-count comparison of four variable-bandpass architectures.
//!
//! Only the published component counts and totals are data. Per-component
//! gate costs are not published, so they are recovered by least squares
//! from the four (counts, total) rows.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Five parallel warped filters.
    WarpedRef1,
    /// Warped filter with a second-order allpass transformation.
    Warped2ndOrderRef3,
    /// Warped filter with coefficients reloaded from memory.
    WarpedMemoryRef4,
    /// Warped filter combined with coefficient decimation.
    Proposed,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::WarpedRef1,
        Architecture::Warped2ndOrderRef3,
        Architecture::WarpedMemoryRef4,
        Architecture::Proposed,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Architecture::WarpedRef1 => "warped_ref1",
            Architecture::Warped2ndOrderRef3 => "warped_2nd_order_ref3",
            Architecture::WarpedMemoryRef4 => "warped_memory_ref4",
            Architecture::Proposed => "proposed",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Architecture::WarpedRef1 => "Warped FIR",
            Architecture::Warped2ndOrderRef3 => "Warped 2nd-order",
            Architecture::WarpedMemoryRef4 => "Warped with memory",
            Architecture::Proposed => "Proposed VDF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub multipliers: u64,
    pub multiplexers_4to1: u64,
    pub adders: u64,
    pub memory_words: u64,
}

impl ComponentCounts {
    fn as_row(&self) -> [f64; 4] {
        [
            self.multipliers as f64,
            self.multiplexers_4to1 as f64,
            self.adders as f64,
            self.memory_words as f64,
        ]
    }
}

/// Area of one component in two-input NAND equivalents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitGateCosts {
    pub mult_gates: f64,
    pub mux_gates: f64,
    pub adder_gates: f64,
    pub memword_gates: f64,
}

impl UnitGateCosts {
    fn as_vec(&self) -> [f64; 4] {
        [self.mult_gates, self.mux_gates, self.adder_gates, self.memword_gates]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self { mult_gates: v[0], mux_gates: v[1], adder_gates: v[2], memword_gates: v[3] }
    }

    pub fn rounded(&self) -> Self {
        Self::from_slice(&self.as_vec().map(f64::round))
    }
}

pub fn table1_counts(arch: Architecture) -> ComponentCounts {
    let (multipliers, multiplexers_4to1, adders, memory_words) = match arch {
        Architecture::WarpedRef1 => (3125, 0, 1750, 0),
        Architecture::Warped2ndOrderRef3 => (1375, 0, 3300, 0),
        Architecture::WarpedMemoryRef4 => (825, 0, 1650, 1275),
        Architecture::Proposed => (901, 600, 1800, 0),
    };
    ComponentCounts { multipliers, multiplexers_4to1, adders, memory_words }
}

/// Published total gate count.
pub fn table1_total(arch: Architecture) -> f64 {
    match arch {
        Architecture::WarpedRef1 => 5_706_250.0,
        Architecture::Warped2ndOrderRef3 => 3_080_000.0,
        Architecture::WarpedMemoryRef4 => 1_820_750.0,
        Architecture::Proposed => 1_957_700.0,
    }
}

pub fn total_gates(counts: &ComponentCounts, unit: &UnitGateCosts) -> f64 {
    counts.as_row().iter().zip(unit.as_vec()).map(|(c, u)| c * u).sum()
}

/// Percentage saved by `proposed_total` relative to `other_total`.
pub fn savings_vs(proposed_total: f64, other_total: f64) -> f64 {
    (other_total - proposed_total) / other_total * 100.0
}

/// Least-squares unit costs for arbitrary `(counts, total)` rows.
///
/// Component kinds that never appear get zero cost. Fails if the remaining
/// columns are linearly dependent.
pub fn solve_unit_costs(rows: &[(ComponentCounts, f64)]) -> Result<UnitGateCosts> {
    if rows.is_empty() {
        return Err(Error::Singular("no rows".into()));
    }
    let a = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i].0.as_row()[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let used = (0..4).filter(|&j| a.column(j).iter().any(|&v| v != 0.0)).count();
    let svd = a.svd(true, true);
    let eps = 1e-9 * svd.singular_values.max();
    if svd.rank(eps) < used {
        return Err(Error::Singular(format!(
            "rank {} below the {used} component kinds present",
            svd.rank(eps)
        )));
    }
    let x = svd.solve(&b, eps).map_err(|e| Error::Singular(e.to_string()))?;
    Ok(UnitGateCosts::from_slice(x.as_slice()))
}

/// Recovered unit costs and how well they reproduce the published totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCostFit {
    pub costs: UnitGateCosts,
    /// Reconstructed minus published total, per architecture.
    pub residuals: Vec<(Architecture, f64)>,
    /// Costs rounded to whole gates.
    pub rounded: UnitGateCosts,
    /// Residuals when the rounded costs are used.
    pub rounded_residuals: Vec<(Architecture, f64)>,
}

impl UnitCostFit {
    pub fn max_relative_residual(&self) -> f64 {
        rel_max(&self.residuals)
    }

    pub fn max_rounded_relative_residual(&self) -> f64 {
        rel_max(&self.rounded_residuals)
    }
}

fn rel_max(r: &[(Architecture, f64)]) -> f64 {
    r.iter()
        .map(|(a, d)| (d / table1_total(*a)).abs())
        .fold(0.0, f64::max)
}

fn residuals(unit: &UnitGateCosts) -> Vec<(Architecture, f64)> {
    Architecture::ALL
        .iter()
        .map(|&a| (a, total_gates(&table1_counts(a), unit) - table1_total(a)))
        .collect()
}

pub fn derive_unit_costs() -> Result<UnitCostFit> {
    let rows: Vec<_> = Architecture::ALL
        .iter()
        .map(|&a| (table1_counts(a), table1_total(a)))
        .collect();
    let costs = solve_unit_costs(&rows)?;
    let rounded = costs.rounded();
    Ok(UnitCostFit {
        residuals: residuals(&costs),
        rounded_residuals: residuals(&rounded),
        costs,
        rounded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub architecture: Architecture,
    pub counts: ComponentCounts,
    pub total_gates: f64,
    /// Positive when the architecture costs more than the proposed one.
    pub delta_vs_proposed_pct: f64,
}

pub fn cost_reports(unit: &UnitGateCosts) -> Vec<CostReport> {
    let proposed = total_gates(&table1_counts(Architecture::Proposed), unit);
    Architecture::ALL
        .iter()
        .map(|&a| {
            let counts = table1_counts(a);
            let total = total_gates(&counts, unit);
            CostReport {
                architecture: a,
                counts,
                total_gates: total,
                delta_vs_proposed_pct: savings_vs(proposed, total),
            }
        })
        .collect()
}

/// Whole-percent label, truncated toward zero as in the published table.
pub fn percent_label(pct: f64) -> String {
    format!("{:+}%", pct.trunc() as i64)
}

/// Table with one column per architecture, followed by the recovered
/// unit costs and the residual notes.
pub fn render_table(reports: &[CostReport], fit: &UnitCostFit) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<20}", "");
    for r in reports {
        let _ = write!(s, "{:>24}", r.architecture.label());
    }
    s.push('\n');
    type Field = fn(&ComponentCounts) -> u64;
    let rows: [(&str, Field); 4] = [
        ("Multipliers", |c| c.multipliers),
        ("Multiplexers (4:1)", |c| c.multiplexers_4to1),
        ("Adders", |c| c.adders),
        ("Words of memory", |c| c.memory_words),
    ];
    for (name, get) in rows {
        let _ = write!(s, "{name:<20}");
        for r in reports {
            let _ = write!(s, "{:>24}", get(&r.counts));
        }
        s.push('\n');
    }
    let _ = write!(s, "{:<20}", "Total gate count");
    for r in reports {
        let cell = if r.architecture == Architecture::Proposed {
            format!("{:.0}", r.total_gates)
        } else {
            format!("{:.0} ({})", r.total_gates, percent_label(r.delta_vs_proposed_pct))
        };
        let _ = write!(s, "{cell:>24}");
    }
    s.push('\n');

    let c = &fit.costs;
    let _ = writeln!(
        s,
        "\nunit costs (NAND2 eq.): multiplier {:.4}, mux {:.4}, adder {:.4}, memory word {:.4}",
        c.mult_gates, c.mux_gates, c.adder_gates, c.memword_gates
    );
    for (a, d) in &fit.rounded_residuals {
        if d.abs() > 0.5 {
            let _ = writeln!(
                s,
                "note: with whole-gate unit costs the {} total is off by {:+.0} gates ({:+.4}%)",
                a.id(),
                d,
                100.0 * d / table1_total(*a)
            );
        }
    }
    if (c.memword_gates - c.memword_gates.round()).abs() > 1e-6 {
        let _ = writeln!(
            s,
            "note: memory-word cost {:.4} is not a whole number of gates",
            c.memword_gates
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_counts() {
        assert_eq!(
            table1_counts(Architecture::Proposed),
            ComponentCounts { multipliers: 901, multiplexers_4to1: 600, adders: 1800, memory_words: 0 }
        );
        assert_eq!(table1_counts(Architecture::WarpedRef1).multipliers, 3125);
        assert_eq!(table1_counts(Architecture::WarpedRef1).adders, 1750);
        let r4 = table1_counts(Architecture::WarpedMemoryRef4);
        assert_eq!((r4.multipliers, r4.adders, r4.memory_words), (825, 1650, 1275));
    }

    #[test]
    fn two_row_solve() {
        let rows = [
            (table1_counts(Architecture::WarpedRef1), table1_total(Architecture::WarpedRef1)),
            (table1_counts(Architecture::Warped2ndOrderRef3), table1_total(Architecture::Warped2ndOrderRef3)),
        ];
        let u = solve_unit_costs(&rows).unwrap();
        assert!((u.mult_gates - 1700.0).abs() < 1e-6, "{u:?}");
        assert!((u.adder_gates - 225.0).abs() < 1e-6);
        assert!(u.mux_gates.abs() < 1e-9);
        assert!(u.memword_gates.abs() < 1e-9);
    }

    #[test]
    fn full_fit() {
        let fit = derive_unit_costs().unwrap();
        let c = fit.costs;
        assert!((c.mult_gates - 1700.0).abs() < 1e-6);
        assert!((c.adder_gates - 225.0).abs() < 1e-6);
        // (1957700 - 901*1700 - 1800*225) / 600
        assert!((c.mux_gates - 35.0).abs() < 1e-6);
        // 47000 / 1275
        assert!((c.memword_gates - 47000.0 / 1275.0).abs() < 1e-6);
        assert!(fit.max_relative_residual() < 1e-9);
        assert_eq!(fit.rounded.memword_gates, 37.0);
        assert!(fit.max_rounded_relative_residual() < 0.0015);
        let (_, d4) = fit.rounded_residuals[2];
        assert!((d4 - 175.0).abs() < 1e-6);
    }

    #[test]
    fn totals() {
        let fit = derive_unit_costs().unwrap();
        let t = total_gates(&table1_counts(Architecture::WarpedRef1), &fit.costs);
        assert!((t - 5_706_250.0).abs() < 1e-3);
        let p = total_gates(&table1_counts(Architecture::Proposed), &fit.costs);
        assert!((p / 1_957_700.0 - 1.0).abs() < 1e-3);
        assert_eq!(total_gates(&ComponentCounts::default(), &fit.costs), 0.0);
    }

    #[test]
    fn savings() {
        assert!((savings_vs(1_957_700.0, 5_706_250.0) - 65.69).abs() < 0.01);
        assert!((savings_vs(1_957_700.0, 3_080_000.0) - 36.44).abs() < 0.01);
        assert_eq!(savings_vs(42.0, 42.0), 0.0);
        assert_eq!(percent_label(65.69), "+65%");
        assert_eq!(percent_label(-7.52), "-7%");
    }

    #[test]
    fn singular_rows() {
        let c = table1_counts(Architecture::WarpedRef1);
        let doubled = ComponentCounts { multipliers: 2 * c.multipliers, adders: 2 * c.adders, ..c };
        let rows = [(c, 1.0), (doubled, 2.0)];
        assert!(matches!(solve_unit_costs(&rows), Err(Error::Singular(_))));
        assert!(solve_unit_costs(&[]).is_err());
    }

    #[test]
    fn table_layout() {
        let fit = derive_unit_costs().unwrap();
        let t = render_table(&cost_reports(&fit.costs), &fit);
        assert!(t.contains("5706250 (+65%)"));
        assert!(t.contains("3080000 (+36%)"));
        assert!(t.contains("1820750 (-7%)"));
        assert!(t.contains("1957700"));
        assert!(t.contains("warped_memory_ref4 total is off by +175 gates"));
    }

    #[test]
    fn report_json() {
        let fit = derive_unit_costs().unwrap();
        let v = serde_json::to_value(cost_reports(&fit.costs)).unwrap();
        assert_eq!(v[0]["architecture"], "warped_ref1");
        assert_eq!(v[3]["counts"]["multiplexers_4to1"], 600);
    }
}
