//! Acceptance run: one line per criterion, nonzero exit if any gated
//! criterion fails.

mod common;

use std::time::Instant;

use common::*;
use mvlang::dataset::align;
use mvlang::distance::cosine_distance_matrix;
use mvlang::evaluation::{predict_features, spearman, Protocol, TypologyDataset};
use mvlang::phylo::{agglomerate, cophenetic, parse_newick, read_newick, to_tree, Linkage};
use mvlang::selection::silhouette_samples;
use mvlang::svcca::{fit_cca, fit_svcca};
use mvlang::treedist::{napted, ted_labeled, EditCost};
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn comb(leaves: usize, prefix: &str) -> String {
    let names: Vec<String> = (0..leaves).map(|i| format!("{prefix}{i}")).collect();
    let body = names[1..]
        .iter()
        .fold(names[0].clone(), |acc, n| format!("({acc},{n})"));
    format!("{body};")
}

/// Reported rows as (edit distance, |τ|, four-decimal value, printed value),
/// each against the 33-node reference tree.
fn criterion_1() -> Outcome {
    let gs =
        read_newick(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/gold_ie17.nwk")).map_err(|e| e.to_string())?;
    check(gs.len() == 33, || format!("reference tree has {} nodes", gs.len()))?;
    let rows = [
        (30.0, 33usize, 0.4545, 0.45),
        (35.0, 31, 0.5469, 0.54),
        (35.0, 23, 0.625, 0.62),
        (10.0, 33, 0.1515, 0.15),
    ];
    let mut shown = Vec::new();
    for (ted, size, four, printed) in rows {
        let other = parse_newick(&comb(size.div_ceil(2), "l")).map_err(|e| e.to_string())?;
        check(other.len() == size, || format!("comb has {} nodes", other.len()))?;
        let v = napted(ted, &gs, &other).map_err(|e| e.to_string())?;
        check((v - four).abs() < 5e-5, || {
            format!("{ted}/{} = {v}, expected {four}", 33 + size)
        })?;
        // Printed values are truncated to two decimals.
        let truncated = (v * 100.0 + 1e-9).floor() / 100.0;
        check((truncated - printed).abs() < 1e-12, || {
            format!("{v} prints as {truncated}, not {printed}")
        })?;
        shown.push(format!("{v:.4}"));
    }
    check(gs.len() * 2 == 66, || "maximum cost is not 66".into())?;
    Ok(format!("nAPTED {}; max cost 66", shown.join(", ")))
}

fn criterion_2() -> Outcome {
    let shapes = all_shapes(6);
    check(shapes.len() == 1 + 1 + 2 + 5 + 14 + 42, || {
        format!("{} shapes", shapes.len())
    })?;
    let labeled: Vec<Vec<_>> = shapes
        .iter()
        .map(|s| (0..1u32 << s.len()).map(|b| s.labeled(b, ["x", "y"])).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..shapes.len())
        .flat_map(|a| (0..shapes.len()).map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<usize, String>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let table = brute_force_ted_table(&shapes[a], &shapes[b]);
            let mut n = 0;
            for (la, ta) in labeled[a].iter().enumerate() {
                for (lb, tb) in labeled[b].iter().enumerate() {
                    let got = ted_labeled(ta, tb, EditCost::default());
                    if got != table[la][lb] as f64 {
                        return Err(format!("{ta:?} vs {tb:?}: {got} != {}", table[la][lb]));
                    }
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{total} labeled pairs over {} shapes, all exact", shapes.len()))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    for case in 0..200 {
        let p = r.gen_range(1..=8);
        let q = r.gen_range(1..=8);
        let n = r.gen_range(p.max(q) + 2..=50);
        let x = gaussian(&mut r, n, p);
        let y = &x * gaussian(&mut r, p, q) * r.gen_range(0.0..1.0) + gaussian(&mut r, n, q);
        let ridge = [0.0, 1e-8, 1e-3, 0.1][case % 4];
        let got = fit_cca(&x, &y, 0.5, ridge).map_err(|e| format!("case {case}: {e}"))?;
        let want = cca_oracle(&x, &y, ridge);
        check(got.correlations().len() == want.len(), || {
            format!("case {case}: spectrum length")
        })?;
        for (g, w) in got.correlations().iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
        let same = fit_cca(&x, &x, 0.5, 0.0).map_err(|e| format!("case {case}: {e}"))?;
        for c in same.correlations() {
            worst_identity = worst_identity.max((c - 1.0).abs());
        }
    }
    check(worst <= 1e-6, || format!("max deviation {worst:.2e} > 1e-6"))?;
    check(worst_identity <= 1e-8, || {
        format!("identical views deviate by {worst_identity:.2e}")
    })?;
    Ok(format!(
        "200 instances, max |Δρ| {worst:.1e}, identical views max |1−ρ| {worst_identity:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let hits = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let (x, y) = planted_views(seed, 100, 4, (40, 30), 0.05);
            align(&x, &y)
                .and_then(|av| fit_svcca(&av, 0.95, 0.95, 0.5))
                .is_ok_and(|m| m.shared_dim() == 4)
        })
        .count();
    check(hits >= 95, || format!("{hits}/100 seeds retained exactly 4 dimensions"))?;
    Ok(format!("{hits}/100 seeds retain exactly 4 dimensions"))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let d = cosine_distance_matrix(&view("v", gaussian(&mut rng(500 + seed), 8, 5))).map_err(|e| e.to_string())?;
        for linkage in [Linkage::Average, Linkage::Ward] {
            let steps = agglomerate(&d, linkage).map_err(|e| e.to_string())?;
            let naive = naive_agglomerate(d.data(), linkage == Linkage::Ward);
            for (s, (l, r, h)) in steps.iter().zip(&naive) {
                check((s.left, s.right) == (*l, *r), || {
                    format!("seed {seed} {linkage}: merge order differs")
                })?;
                worst = worst.max((s.height - h).abs());
            }
        }
        let labels: Vec<&str> = d.languages().iter().map(|c| c.as_str()).collect();
        for linkage in Linkage::ALL {
            let steps = agglomerate(&d, linkage).map_err(|e| e.to_string())?;
            let t = to_tree(&steps, &labels).map_err(|e| e.to_string())?;
            let c = cophenetic(&t).map_err(|e| e.to_string())?;
            let m = c.data();
            for i in 0..8 {
                for j in 0..8 {
                    for k in 0..8 {
                        check(m[(i, k)] <= m[(i, j)].max(m[(j, k)]) + 1e-12, || {
                            format!("seed {seed} {linkage}: ultrametric fails on ({i},{j},{k})")
                        })?;
                    }
                }
            }
        }
    }
    check(worst <= 1e-10, || format!("max height deviation {worst:.2e}"))?;
    Ok(format!(
        "100 instances, max height deviation {worst:.1e}, all cophenetic matrices ultrametric"
    ))
}

fn criterion_6() -> Outcome {
    let d = seven_points();
    let mut worst: f64 = 0.0;
    for (labels, want) in SEVEN_POINT_SILHOUETTES {
        let got = silhouette_samples(&d, &labels).map_err(|e| e.to_string())?;
        let naive = naive_silhouette(&d, &labels);
        for i in 0..7 {
            worst = worst.max((got[i] - want[i]).abs()).max((got[i] - naive[i]).abs());
        }
    }
    check(worst <= 1e-12, || format!("silhouette deviates by {worst:.2e}"))?;
    let mut worst_rho: f64 = 0.0;
    for seed in 0..100 {
        let (a, b) = (random_distances(seed, 10), random_distances(seed + 7_000, 10));
        let got = spearman(&a, &b).map_err(|e| e.to_string())?.rho;
        let want = pearson(
            &naive_average_ranks(&upper_triangle(a.data())),
            &naive_average_ranks(&upper_triangle(b.data())),
        );
        worst_rho = worst_rho.max((got - want).abs());
    }
    check(worst_rho <= 1e-12, || format!("spearman deviates by {worst_rho:.2e}"))?;
    Ok(format!(
        "silhouette max dev {worst:.1e}, spearman max dev {worst_rho:.1e} over 100 pairs"
    ))
}

fn criterion_7() -> Outcome {
    let mut lowest = f64::INFINITY;
    for seed in 0..20 {
        let (inputs, labels) = decodable_features(seed, 60, 6, 0.02);
        let families = 5 + seed as usize % 4;
        let meta = round_robin_meta(&labels, families);
        let data = TypologyDataset::new(labels)
            .and_then(|d| d.with_meta(&meta))
            .map_err(|e| e.to_string())?;
        let lolo = predict_features(&inputs, &data, Protocol::OneLanguageOut).map_err(|e| e.to_string())?;
        check(lolo.n_folds == 60, || {
            format!("seed {seed}: {} language folds", lolo.n_folds)
        })?;
        check(lolo.macro_accuracy >= 0.95, || {
            format!("seed {seed}: accuracy {:.4}", lolo.macro_accuracy)
        })?;
        lowest = lowest.min(lolo.macro_accuracy);
        let lofo = predict_features(&inputs, &data, Protocol::OneFamilyOut).map_err(|e| e.to_string())?;
        check(lofo.n_folds == families, || {
            format!("seed {seed}: {} family folds", lofo.n_folds)
        })?;
    }
    Ok(format!(
        "20 seeds, lowest one-language-out accuracy {lowest:.4}; fold counts match"
    ))
}

fn criterion_8() -> Outcome {
    let cases = 2000u64;
    (0..cases)
        .into_par_iter()
        .try_for_each(|seed| check_ranking(&ranking_case(seed)).map_err(|e| format!("seed {seed}: {e}")))?;
    Ok(format!("{cases} randomized instances"))
}

const PUBLISHED_TARGETS: &str =
    "typology accuracy from task vectors 77.96 -> 85.37; best tree distance 10 (nAPTED 0.15); \
rank correlations 0.48 / 0.68 / 0.80 (±0.03); silhouette peak k = 10; per-task k = 5, 3, 4, 6, 10; trees ±2 edits. \
Needs external data, see scripts/reproduce.sh";

fn main() {
    let criteria: [Criterion; 8] = [
        ("nAPTED arithmetic", criterion_1),
        ("TED exhaustive oracle (<= 6 nodes)", criterion_2),
        ("CCA eigenproblem oracle", criterion_3),
        ("SVCCA planted latent recovery", criterion_4),
        ("agglomeration oracle and ultrametricity", criterion_5),
        ("silhouette and Spearman oracles", criterion_6),
        ("feature-prediction harness", criterion_7),
        ("ranking invariants", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("SKIP criterion 9: published-data targets, not gated ({PUBLISHED_TARGETS})");
    if failed > 0 {
        println!("{failed} gated criteria failed");
        std::process::exit(1);
    }
    println!("all 8 gated criteria passed");
}
