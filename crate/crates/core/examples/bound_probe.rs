//! Robustness probe: a wide fresh-seed sweep of every zero-tolerance bound,
//! printing any violation. Complements the fixed-corpus acceptance suite by
//! estimating the in-distribution violation probability.
//!
//! ```sh
//! cargo run --release -p congest-core --example bound_probe
//! ```
use congest_core::dag::{run_dag_apsp, run_dag_bc, DagConfig};
use congest_core::graph::{generate, GeneratorKind};
use congest_core::oracle;
use congest_core::unweighted::{run_bc, run_directed_apsp, UnweightedConfig};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x900d);
    let mut viol = 0;
    let mut total = 0;
    for i in 0..600u64 {
        let n = rng.gen_range(4..=40);
        let p = rng.gen_range(0.1..=0.5);
        let g = generate(
            GeneratorKind::RandomStronglyConnected,
            n,
            p,
            None,
            7_000_000 + i,
        )
        .unwrap();
        let (nn, m) = (g.n() as u64, g.m() as u64);
        let d = oracle::directed_diameter(&g).unwrap();
        let full = UnweightedConfig {
            know_n: false,
            finalizer: true,
            ..Default::default()
        };
        let bare = UnweightedConfig::default();
        let a = run_directed_apsp(&g, &full).unwrap();
        let b = run_directed_apsp(&g, &bare).unwrap();
        total += 1;
        let mut bad = vec![];
        if a.metrics.rounds_elapsed > nn + 5 * d {
            bad.push(format!(
                "rounds {} > n+5D {}",
                a.metrics.rounds_elapsed,
                nn + 5 * d
            ));
        }
        if a.diameters_learned.iter().any(|x| *x != Some(d)) {
            bad.push("a node missed the diameter".into());
        }
        if a.metrics.total_messages > m * nn + 4 * m {
            bad.push(format!(
                "msgs {} > mn+4m {}",
                a.metrics.total_messages,
                m * nn + 4 * m
            ));
        }
        if b.metrics.rounds_elapsed > 2 * nn {
            bad.push("2n".into());
        }
        if b.metrics.total_messages > m * nn {
            bad.push("mn".into());
        }
        let bc = run_bc(&g, &full).unwrap();
        if bc.metrics.total_messages > 2 * m * nn + 4 * m {
            bad.push("2mn+4m".into());
        }
        if !bad.is_empty() {
            viol += 1;
            println!("seed {i}: n={nn} m={m} D={d} p={p:.3}: {}", bad.join("; "));
        }
    }
    println!("strong sweep: {viol}/{total} violations");
    let mut viol = 0;
    let mut total = 0;
    for i in 0..400u64 {
        let n = rng.gen_range(4..=40);
        let p = rng.gen_range(0.1..=0.5);
        let wmax = [1, 10, 100][i as usize % 3];
        let g = generate(GeneratorKind::RandomDag, n, p, Some(wmax), 8_000_000 + i).unwrap();
        let (nn, m) = (g.n() as u64, g.m() as u64);
        let l = oracle::longest_path_l(&g).unwrap();
        let a = run_dag_apsp(&g, &DagConfig::default()).unwrap();
        let b = run_dag_bc(&g, &DagConfig::default()).unwrap();
        total += 1;
        let mut bad = vec![];
        if a.metrics.rounds_elapsed > nn + 2 * l {
            bad.push("n+2L".to_string());
        }
        if a.metrics.total_messages > m * nn + m {
            bad.push("mn+m".into());
        }
        if b.metrics.rounds_elapsed > 2 * nn + 3 * l {
            bad.push("2n+3L".into());
        }
        if b.metrics.total_messages > 2 * m * nn + m {
            bad.push("2mn+m".into());
        }
        if !bad.is_empty() {
            viol += 1;
            println!("dag seed {i}: n={nn} m={m} L={l}: {}", bad.join("; "));
        }
    }
    println!("dag sweep: {viol}/{total} violations");
}
