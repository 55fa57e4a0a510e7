//! Query-time benchmark: wall time of the selection step per strategy.

use std::io::{self, Write};
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use gpada::data::{generate_synthetic, PoolState, SyntheticSpec};
use gpada::engine::{fit_supervised, query_oracle, select_round, LoopConfig, Strategy};

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Unlabeled target samples
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    /// Selection rounds timed per strategy
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
    /// Strategies to time; all of them when omitted
    #[arg(long = "only", value_delimiter = ',')]
    pub only: Vec<Strategy>,
}

impl Default for BenchArgs {
    fn default() -> Self {
        Self {
            n: 5000,
            dim: 64,
            classes: 10,
            rounds: 5,
            only: Vec::new(),
        }
    }
}

pub const BENCH_HEADER: &str = "strategy,round,unlabeled,harvested,queried,selection_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub round: usize,
    /// Unlabeled pool size at the start of the round.
    pub unlabeled: usize,
    pub harvested: usize,
    pub queried: usize,
    pub selection_ms: f64,
}

/// Times `args.rounds` selection rounds for each strategy on a synthetic pool
/// of `args.n` target samples. The head is fit on source labels once and not
/// retrained between rounds, so only selection is measured.
pub fn run(args: &BenchArgs, base: &LoopConfig) -> Result<Vec<BenchRow>> {
    anyhow::ensure!(args.classes >= 2, "bench needs at least 2 classes");
    anyhow::ensure!(args.n >= args.classes, "bench needs at least one sample per class");
    anyhow::ensure!(args.rounds >= 1, "bench needs at least one round");
    let spec = SyntheticSpec {
        num_classes: args.classes,
        dim: args.dim,
        per_class_per_domain: args.n / args.classes,
        seed: base.seed,
        ..SyntheticSpec::default()
    };
    let ds = generate_synthetic(&spec)?;
    let labeled: Vec<(u64, usize)> = ds
        .source_ids()
        .into_iter()
        .map(|id| (id, ds.get(id).expect("source id").true_label))
        .collect();
    let model = fit_supervised(&ds, &labeled, 1, &base.optimizer, base.seed)?;

    let strategies = if args.only.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        args.only.clone()
    };
    let mut rows = Vec::new();
    for strategy in strategies {
        let config = LoopConfig {
            strategy,
            rounds: args.rounds,
            ..base.clone()
        };
        let mut pool = PoolState::new(ds.source_ids(), ds.target_ids(), config.budget_fraction, args.rounds)?;
        for round in 1..=args.rounds {
            let unlabeled = pool.unlabeled_ids().len();
            let started = Instant::now();
            let budget = pool.round_budget(round);
            let sel = select_round(&config, &ds, &model, &mut pool, round, budget)?;
            let selection_ms = started.elapsed().as_secs_f64() * 1e3;
            query_oracle(&mut pool, &ds, &sel.queries.ids)?;
            rows.push(BenchRow {
                strategy,
                round,
                unlabeled,
                harvested: sel.harvested.len(),
                queried: sel.queries.ids.len(),
                selection_ms,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{BENCH_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            r.strategy, r.round, r.unlabeled, r.harvested, r.queried, r.selection_ms
        )?;
    }
    Ok(())
}

/// One line per strategy with its mean and worst round time.
pub fn summarize(rows: &[BenchRow]) -> Vec<String> {
    let mut order: Vec<Strategy> = Vec::new();
    for r in rows {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    order
        .into_iter()
        .map(|s| {
            let times: Vec<f64> = rows
                .iter()
                .filter(|r| r.strategy == s)
                .map(|r| r.selection_ms)
                .collect();
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            let worst = times.iter().copied().fold(0.0, f64::max);
            format!("{s:>14}  mean {mean:9.2} ms  max {worst:9.2} ms")
        })
        .collect()
}
