//! Human-readable run reports, in aligned text and CSV. Every rational is
//! rendered both exactly and as a six-place decimal; decimals are
//! display-only.

use crate::designer::{EquilibriumOutcome, SigmaStar};
use crate::extremal::verify_extremal_segmentation;
use crate::market::Market;
use crate::rational::{canonical, decimal6, display_pair, Rational};
use crate::verifier::{
    verify_public_equilibrium, BenchmarkComparison, EquilibriumCheck, MinimaxEntry,
};

#[derive(Debug, Clone)]
pub struct SegmentRow {
    pub label: String,
    pub weight: Rational,
    pub composition: Vec<Rational>,
    pub owner: Option<usize>,
    pub prices: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct FirmRow {
    pub firm: usize,
    pub star_price: Option<Rational>,
    pub star_profit: Rational,
    pub minimax_profit: Rational,
    pub witness_price: Rational,
}

#[derive(Debug, Clone)]
pub struct SurplusSummary {
    pub consumer_surplus: Rational,
    pub total_surplus: Rational,
    pub efficient: bool,
}

/// Self-checks re-run on the finished design.
#[derive(Debug, Clone)]
pub struct VerificationSummary {
    pub recombination_exact: bool,
    pub extremal_segments_ok: bool,
    pub equilibrium_verified: bool,
}

impl VerificationSummary {
    pub fn all_ok(&self) -> bool {
        self.recombination_exact && self.extremal_segments_ok && self.equilibrium_verified
    }
}

/// Everything the `design` command prints.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub type_labels: Vec<String>,
    pub firm_count: usize,
    pub segments: Vec<SegmentRow>,
    pub firms: Vec<FirmRow>,
    pub surplus: SurplusSummary,
    pub verification: VerificationSummary,
}

fn value_label(values: &[Rational]) -> String {
    let joined: Vec<String> = values.iter().map(canonical).collect();
    format!("({})", joined.join(","))
}

impl RunReport {
    /// Assembles the report and re-verifies the design from scratch:
    /// recombination, every per-firm extremal segmentation, and the
    /// supported equilibrium against the full deviation search.
    pub fn build(
        market: &Market,
        sigma: &SigmaStar,
        outcome: &EquilibriumOutcome,
        minimax: &[MinimaxEntry],
    ) -> RunReport {
        let type_labels = market
            .types()
            .iter()
            .map(|t| value_label(&t.values))
            .collect();

        let segments = sigma
            .segments()
            .iter()
            .zip(&outcome.segments)
            .enumerate()
            .map(|(i, (seg, out))| SegmentRow {
                label: format!("x{}", i + 1),
                weight: seg.weight.clone(),
                composition: seg.composition.clone(),
                owner: seg.owner.firm(),
                prices: out.prices.clone(),
            })
            .collect();

        let firms = (0..market.firm_count())
            .map(|i| FirmRow {
                firm: i,
                star_price: sigma.plans()[i].as_ref().map(|p| p.star_price.clone()),
                star_profit: outcome.firm_profits[i].clone(),
                minimax_profit: minimax[i].minimax_profit.clone(),
                witness_price: minimax[i].witness_price.clone(),
            })
            .collect();

        let recombination_exact = crate::designer::check_plausibility(sigma);
        let extremal_segments_ok = sigma
            .plans()
            .iter()
            .flatten()
            .all(|plan| verify_extremal_segmentation(&plan.w_segmentation).passed());
        let equilibrium_verified = verify_public_equilibrium(market, &sigma.to_candidate(outcome))
            .map(|check| check.passed())
            .unwrap_or(false);

        RunReport {
            type_labels,
            firm_count: market.firm_count(),
            segments,
            firms,
            surplus: SurplusSummary {
                consumer_surplus: outcome.consumer_surplus.clone(),
                total_surplus: outcome.total_surplus.clone(),
                efficient: outcome.efficient,
            },
            verification: VerificationSummary {
                recombination_exact,
                extremal_segments_ok,
                equilibrium_verified,
            },
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();

        let mut headers = vec!["Segment".to_string()];
        headers.extend(self.type_labels.iter().cloned());
        headers.push("Mass".to_string());
        headers.push("Owner".to_string());
        headers.push("Prices".to_string());
        let rows: Vec<Vec<String>> = self
            .segments
            .iter()
            .map(|seg| {
                let mut row = vec![seg.label.clone()];
                row.extend(seg.composition.iter().map(display_pair));
                row.push(display_pair(&seg.weight));
                row.push(owner_label(seg.owner));
                row.push(price_list(&seg.prices));
                row
            })
            .collect();
        out.push_str("Segmentation\n");
        out.push_str(&aligned_table(&headers, &rows));

        out.push_str("\nFirms\n");
        let headers = vec![
            "Firm".to_string(),
            "UniformPrice".to_string(),
            "Profit".to_string(),
            "Minimax".to_string(),
            "Witness".to_string(),
        ];
        let rows: Vec<Vec<String>> = self
            .firms
            .iter()
            .map(|f| {
                vec![
                    format!("firm {}", f.firm),
                    f.star_price
                        .as_ref()
                        .map(display_pair)
                        .unwrap_or_else(|| "-".to_string()),
                    display_pair(&f.star_profit),
                    display_pair(&f.minimax_profit),
                    display_pair(&f.witness_price),
                ]
            })
            .collect();
        out.push_str(&aligned_table(&headers, &rows));

        out.push_str("\nSurplus\n");
        out.push_str(&format!(
            "  consumer surplus: {}\n  total surplus:    {}\n  efficient:        {}\n",
            display_pair(&self.surplus.consumer_surplus),
            display_pair(&self.surplus.total_surplus),
            self.surplus.efficient
        ));

        out.push_str("\nVerification\n");
        out.push_str(&format!(
            "  recombination exact:    {}\n  extremal segments ok:   {}\n  equilibrium verified:   {}\n",
            pass_fail(self.verification.recombination_exact),
            pass_fail(self.verification.extremal_segments_ok),
            pass_fail(self.verification.equilibrium_verified)
        ));
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# segmentation\n");
        let mut headers = vec!["segment".to_string()];
        for i in 0..self.type_labels.len() {
            headers.push(format!("comp_{i}"));
            headers.push(format!("comp_{i}_dec"));
        }
        headers.push("mass".into());
        headers.push("mass_dec".into());
        headers.push("owner".into());
        for i in 0..self.firm_count {
            headers.push(format!("price_{i}"));
            headers.push(format!("price_{i}_dec"));
        }
        out.push_str(&headers.join(","));
        out.push('\n');
        for seg in &self.segments {
            let mut row = vec![seg.label.clone()];
            for c in &seg.composition {
                row.push(canonical(c));
                row.push(decimal6(c));
            }
            row.push(canonical(&seg.weight));
            row.push(decimal6(&seg.weight));
            row.push(
                seg.owner
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| "residual".to_string()),
            );
            for p in &seg.prices {
                row.push(canonical(p));
                row.push(decimal6(p));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }

        out.push_str("\n# firms\n");
        out.push_str("firm,uniform_price,uniform_price_dec,profit,profit_dec,minimax,minimax_dec,witness,witness_dec\n");
        for f in &self.firms {
            let (sp, spd) = match &f.star_price {
                Some(p) => (canonical(p), decimal6(p)),
                None => ("-".to_string(), "-".to_string()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                f.firm,
                sp,
                spd,
                canonical(&f.star_profit),
                decimal6(&f.star_profit),
                canonical(&f.minimax_profit),
                decimal6(&f.minimax_profit),
                canonical(&f.witness_price),
                decimal6(&f.witness_price),
            ));
        }

        out.push_str("\n# surplus\n");
        out.push_str(
            "consumer_surplus,consumer_surplus_dec,total_surplus,total_surplus_dec,efficient\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            canonical(&self.surplus.consumer_surplus),
            decimal6(&self.surplus.consumer_surplus),
            canonical(&self.surplus.total_surplus),
            decimal6(&self.surplus.total_surplus),
            self.surplus.efficient
        ));

        out.push_str("\n# verification\n");
        out.push_str("recombination_exact,extremal_segments_ok,equilibrium_verified\n");
        out.push_str(&format!(
            "{},{},{}\n",
            self.verification.recombination_exact,
            self.verification.extremal_segments_ok,
            self.verification.equilibrium_verified
        ));
        out
    }
}

/// One benchmark entry of the `benchmark` command: either a completed
/// comparison or the reason it is not covered.
#[derive(Debug, Clone)]
pub enum BenchmarkEntry {
    Compared {
        prices: Vec<Rational>,
        policy: String,
        comparison: BenchmarkComparison,
    },
    NotApplicable {
        prices: Vec<Rational>,
        policy: String,
        reason: String,
    },
}

pub fn render_benchmark_text(entries: &[BenchmarkEntry]) -> String {
    let mut out = String::new();
    if entries.is_empty() {
        out.push_str(
            "\nBenchmark\n  no pure unsegmented equilibrium found on the price grid (possibly mixed)\n",
        );
        return out;
    }
    for entry in entries {
        match entry {
            BenchmarkEntry::Compared {
                prices,
                policy,
                comparison,
            } => {
                out.push_str(&format!(
                    "\nBenchmark prices {} (ties: {policy})\n",
                    price_list(prices)
                ));
                out.push_str(&format!(
                    "  pairwise surplus floor: {} ({})\n",
                    display_pair(&comparison.surplus_floor),
                    if comparison.floor_positive {
                        "positive: strict comparison guaranteed"
                    } else {
                        "comparison not covered: floor is not positive"
                    }
                ));
                let headers = vec![
                    "Firm".to_string(),
                    "Unsegmented".to_string(),
                    "Segmented".to_string(),
                    "StrictlyWorse".to_string(),
                ];
                let rows: Vec<Vec<String>> = comparison
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            format!("firm {}", r.firm),
                            display_pair(&r.benchmark_profit),
                            display_pair(&r.segmented_profit),
                            r.strictly_worse.to_string(),
                        ]
                    })
                    .collect();
                out.push_str(&aligned_table(&headers, &rows));
            }
            BenchmarkEntry::NotApplicable {
                prices,
                policy,
                reason,
            } => {
                out.push_str(&format!(
                    "\nBenchmark prices {} (ties: {policy})\n  not applicable: {reason}\n",
                    price_list(prices)
                ));
            }
        }
    }
    out
}

pub fn render_benchmark_csv(entries: &[BenchmarkEntry]) -> String {
    let mut out = String::new();
    out.push_str("\n# benchmark\n");
    out.push_str("prices,policy,firm,unsegmented,unsegmented_dec,segmented,segmented_dec,strictly_worse,surplus_floor,floor_positive,status\n");
    for entry in entries {
        match entry {
            BenchmarkEntry::Compared {
                prices,
                policy,
                comparison,
            } => {
                let price_text = prices.iter().map(canonical).collect::<Vec<_>>().join(" ");
                for r in &comparison.rows {
                    out.push_str(&format!(
                        "{price_text},{policy},{},{},{},{},{},{},{},{},compared\n",
                        r.firm,
                        canonical(&r.benchmark_profit),
                        decimal6(&r.benchmark_profit),
                        canonical(&r.segmented_profit),
                        decimal6(&r.segmented_profit),
                        r.strictly_worse,
                        canonical(&comparison.surplus_floor),
                        comparison.floor_positive,
                    ));
                }
            }
            BenchmarkEntry::NotApplicable {
                prices,
                policy,
                reason,
            } => {
                let price_text = prices.iter().map(canonical).collect::<Vec<_>>().join(" ");
                out.push_str(&format!(
                    "{price_text},{policy},,,,,,,,,not applicable: {reason}\n"
                ));
            }
        }
    }
    out
}

/// The per-segment, per-firm deviation table of an equilibrium check.
pub fn render_equilibrium_check_text(check: &EquilibriumCheck) -> String {
    let headers = vec![
        "Segment".to_string(),
        "Firm".to_string(),
        "ListedPrice".to_string(),
        "ListedProfit".to_string(),
        "BestResponse".to_string(),
        "BestProfit".to_string(),
        "Status".to_string(),
    ];
    let rows: Vec<Vec<String>> = check
        .cells
        .iter()
        .map(|c| {
            vec![
                format!("x{}", c.segment + 1),
                format!("firm {}", c.firm),
                display_pair(&c.listed_price),
                display_pair(&c.listed_profit),
                display_pair(&c.best_price),
                display_pair(&c.best_profit),
                if c.improves {
                    "IMPROVES".to_string()
                } else {
                    "ok".to_string()
                },
            ]
        })
        .collect();
    let mut out = String::from("Deviation audit\n");
    out.push_str(&aligned_table(&headers, &rows));
    out.push_str(&format!(
        "\nResult: {}\n",
        if check.passed() {
            "pass (no firm can strictly gain in any segment)"
        } else {
            "FAIL (a strictly profitable deviation exists)"
        }
    ));
    out
}

pub fn render_minimax_text(minimax: &[MinimaxEntry]) -> String {
    let headers = vec![
        "Firm".to_string(),
        "Minimax".to_string(),
        "Witness".to_string(),
    ];
    let rows: Vec<Vec<String>> = minimax
        .iter()
        .map(|e| {
            vec![
                format!("firm {}", e.firm),
                display_pair(&e.minimax_profit),
                display_pair(&e.witness_price),
            ]
        })
        .collect();
    let mut out = String::from("Minimax profits\n");
    out.push_str(&aligned_table(&headers, &rows));
    out
}

fn owner_label(owner: Option<usize>) -> String {
    match owner {
        Some(i) => format!("firm {i}"),
        None => "residual".to_string(),
    }
}

fn price_list(prices: &[Rational]) -> String {
    let cells: Vec<String> = prices.iter().map(display_pair).collect();
    format!("[{}]", cells.join(", "))
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn aligned_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let render_row = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<width$}", width = widths[i]))
            .collect();
        format!("  {}\n", padded.join("  ").trim_end())
    };
    let mut out = render_row(headers);
    for row in rows {
        out.push_str(&render_row(row));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::{design_sigma_star, supported_equilibrium};
    use crate::market::tests::vertical_market;
    use crate::market::ConsumerType;
    use crate::rational::{rat, rat_int};
    use crate::verifier::minimax_report;

    #[test]
    fn report_renders_both_forms_of_every_rational() {
        let m = vertical_market();
        let sigma = design_sigma_star(&m);
        let eq = supported_equilibrium(&sigma);
        let minimax = minimax_report(&m);
        let report = RunReport::build(&m, &sigma, &eq, &minimax);
        assert!(report.verification.all_ok());

        let text = report.render_text();
        assert!(text.contains("3/4 (0.750000)"));
        assert!(text.contains("1/3 (0.333333)"));
        assert!(text.contains("consumer surplus: 2 (2.000000)"));
        assert!(text.contains("efficient:        true"));

        // the empty-cell firm has no uniform price to show
        assert!(text.contains("firm 1  -"));

        let csv = report.render_csv();
        assert!(csv.contains("# segmentation"));
        assert!(csv.contains("3/4,0.750000"));
        assert!(csv.contains("x1,1/3,0.333333"));
    }

    #[test]
    fn residual_segment_renders_with_residual_owner() {
        let m = Market::new(
            vec![rat_int(0), rat_int(0)],
            vec![
                ConsumerType::new(vec![rat_int(4), rat_int(2)], rat(1, 2)),
                ConsumerType::new(vec![rat_int(3), rat_int(3)], rat(1, 2)),
            ],
            rat_int(4),
        )
        .unwrap();
        let sigma = design_sigma_star(&m);
        let eq = supported_equilibrium(&sigma);
        let minimax = minimax_report(&m);
        let report = RunReport::build(&m, &sigma, &eq, &minimax);
        assert!(report.verification.all_ok());

        let text = report.render_text();
        assert!(text.contains("residual"));

        let csv = report.render_csv();
        assert!(csv.contains(",residual,"));
    }

    #[test]
    fn benchmark_rendering_covers_empty_and_not_applicable() {
        let empty = render_benchmark_text(&[]);
        assert!(empty.contains("no pure unsegmented equilibrium"));

        let na = render_benchmark_text(&[BenchmarkEntry::NotApplicable {
            prices: vec![crate::rational::rat_int(6), crate::rational::rat_int(0)],
            policy: "lowest-index".into(),
            reason: "NonpositiveBenchmarkProfit: firm 1 earns 0 in the benchmark".into(),
        }]);
        assert!(na.contains("not applicable"));
        assert!(na.contains("NonpositiveBenchmarkProfit"));
    }
}
