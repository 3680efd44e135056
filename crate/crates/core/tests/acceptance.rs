//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use pgrepair::automata::compile_automaton;
use pgrepair::conflict::{compute_weights, topological_error, ConflictHypergraph, Vertex, WeightMode};
use pgrepair::constraint::parse_constraint;
use pgrepair::error::LimitError;
use pgrepair::graph::{EdgeId, NodeId, TraceItem};
use pgrepair::matcher::{find_violating_matches, MatchLimits};
use pgrepair::pipeline::{check_satisfies, run_pipeline, run_pipeline_traced, PipelineConfig, SolverKind};
use pgrepair::solvers::{
    brute_force_min_cover, lp_guided_greedy, naive_greedy, naive_greedy_with, solve_ilp, solve_lp, CoverInstance,
    SolverLimits, SolverStatus,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{:.1} ms", took.as_secs_f64() * 1000.0))
}

fn ids<'a>(vs: impl IntoIterator<Item = &'a Vertex>) -> Vec<String> {
    vs.into_iter().map(|v| v.to_string()).collect()
}

fn running_instance() -> CoverInstance {
    let g = organisation();
    let matches = find_violating_matches(&g, &running(), now(), MatchLimits::default()).unwrap();
    let h: ConflictHypergraph = matches.iter().map(topological_error).collect();
    let w = compute_weights(&g, WeightMode::Topological, None).unwrap();
    CoverInstance::new(&h, |v| w.weight(v)).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = organisation();
    let c = running();
    let matches = find_violating_matches(&g, &c, now(), MatchLimits::default()).map_err(|e| e.to_string())?;
    let paths: Vec<String> = matches.iter().map(|m| m.paths[0].1.to_string()).collect();
    ensure(paths == ["<p1,w1,t1,r1,d1,r3,d3>", "<p1,w1,t1,r1,d1,r4,d3>"], format!("violating paths {paths:?}"))?;
    let cover = solve_ilp(&running_instance(), &SolverLimits::default()).map_err(|e| e.to_string())?;
    let allowed = [Vertex::Edge(EdgeId("w1".into())), Vertex::Edge(EdgeId("r1".into()))];
    ensure(cover.weight == 1.0, format!("ILP weight {}", cover.weight))?;
    ensure(cover.vertices.iter().all(|v| allowed.contains(v)), format!("cover {:?}", ids(&cover.vertices)))?;
    let (repaired, report) =
        run_pipeline(&g, std::slice::from_ref(&c), &PipelineConfig::new(now())).map_err(|e| e.to_string())?;
    ensure(check_satisfies(&repaired, &[c], now()).unwrap(), "repaired graph still violates")?;
    ensure(report.error_counts == [2], format!("error counts {:?}", report.error_counts))?;
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("2 matches, cover {:?}, {t}", ids(&cover.vertices)))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = organisation();
    let c = running();
    let config = PipelineConfig { label_mode: true, ..PipelineConfig::new(now()) };
    let (repaired, report) = run_pipeline(&g, std::slice::from_ref(&c), &config).map_err(|e| e.to_string())?;
    ensure(report.total_weight == 1.0, format!("weight {}", report.total_weight))?;
    ensure(report.deletions.len() == 1, format!("{} deletions", report.deletions.len()))?;
    let token = report.deletions.labels.iter().next().ok_or("no label deletion")?;
    ensure(check_satisfies(&repaired, &[c], now()).unwrap(), "repaired graph still violates")?;
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("deleted {token}, {t}"))
}

fn criterion_3() -> Outcome {
    let inst = running_instance();
    let prefer = |inst: &CoverInstance, candidates: &[usize]| {
        candidates.iter().position(|&i| matches!(inst.vertices()[i].id(), "r3" | "r4")).unwrap_or(0)
    };
    let selected = naive_greedy_with(&inst, true, &prefer);
    let trimmed = naive_greedy_with(&inst, false, &prefer);
    let want: BTreeSet<Vertex> = ["r3", "r4"].iter().map(|e| Vertex::Edge(EdgeId(e.to_string()))).collect();
    ensure(selected.vertices == want, format!("selection {:?}", ids(&selected.vertices)))?;
    ensure(trimmed.vertices == want && trimmed.weight == 2.0, format!("trimmed {:?}", ids(&trimmed.vertices)))?;
    let default = naive_greedy(&inst, false);
    ensure(default.weight == 1.0, format!("default tie-break weight {}", default.weight))?;
    Ok(format!("adversarial {:?} (weight 2), default {:?} (weight 1)", ids(&trimmed.vertices), ids(&default.vertices)))
}

fn criterion_4_and_8() -> (Outcome, Outcome) {
    let start = Instant::now();
    let limits = SolverLimits::default();
    let mut failures_4 = Vec::new();
    let mut failures_8 = Vec::new();
    let mut integral = 0;
    for seed in 0..200u64 {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed));
        let (Ok(ilp), Ok(brute), Ok(lp), Ok(guided)) = (
            solve_ilp(&inst, &limits),
            brute_force_min_cover(&inst),
            solve_lp(&inst, &limits),
            lp_guided_greedy(&inst, false, &limits),
        ) else {
            failures_4.push(format!("seed {seed}: solver error"));
            continue;
        };
        if (ilp.weight - brute.weight).abs() > 1e-9 || (ilp.weight - min_cover_weight(&inst)).abs() > 1e-9 {
            failures_4.push(format!("seed {seed}: ILP {} vs oracle {}", ilp.weight, brute.weight));
        }
        if lp.objective > ilp.weight + 1e-6 {
            failures_4.push(format!("seed {seed}: LP {} > ILP {}", lp.objective, ilp.weight));
        }
        let greedy = naive_greedy(&inst, false);
        if greedy.weight < ilp.weight - 1e-9 || guided.weight < ilp.weight - 1e-9 {
            failures_8.push(format!("seed {seed}: greedy below ILP"));
        }
        if lp.is_integral() {
            integral += 1;
            if (guided.weight - ilp.weight).abs() > 1e-9 {
                failures_8.push(format!("seed {seed}: integral LP but guided {} vs ILP {}", guided.weight, ilp.weight));
            }
        }
    }
    let c4 = if failures_4.is_empty() {
        within(start, Duration::from_secs(30)).map(|t| format!("200/200 instances, {t}"))
    } else {
        Err(failures_4.join("; "))
    };
    let c8 = if failures_8.is_empty() {
        Ok(format!("200/200 instances, {integral} with integral LP optimum"))
    } else {
        Err(failures_8.join("; "))
    };
    (c4, c8)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let labels = ["a", "b", "c", "d"];
    let limits = MatchLimits { max_matches: 50_000, ..MatchLimits::default() };
    let mut done = 0;
    let mut skipped = 0;
    let mut with_errors = 0;
    let mut seed = 0u64;
    while done < 100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        seed += 1;
        let graph = random_graph(&mut rng, 15, 25, &labels);
        let c = random_positive_constraint(&mut rng, &labels);
        let mut any_errors = false;
        let mut capped = false;
        for solver in [SolverKind::Ilp, SolverKind::Greedy] {
            let config = PipelineConfig { solver, match_limits: limits, ..PipelineConfig::new(now()) };
            match run_pipeline(&graph, std::slice::from_ref(&c), &config) {
                Ok((_, report)) => {
                    any_errors |= report.error_counts[0] > 0;
                    ensure(report.verification.satisfied, format!("seed {seed}, {solver}: {c} still violated"))?;
                    ensure(
                        report.verification.single_object_maximal == Some(true),
                        format!("seed {seed}, {solver}: {c} not single-object maximal"),
                    )?;
                }
                Err(pgrepair::error::PipelineError::Limit(LimitError::Matches(_))) => capped = true,
                Err(e) => return Err(format!("seed {seed}: {e}")),
            }
        }
        if capped {
            skipped += 1;
            continue;
        }
        done += 1;
        with_errors += any_errors as usize;
    }
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("100/100 pass ({with_errors} with violations, {skipped} over the match cap replaced), {t}"))
}

fn criterion_6() -> Outcome {
    let shape = PatternShape { labels: &TRACE_LABELS, negation: true, reverse: true, labelled_loops: false };
    let mut accepted = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2_000 + seed);
        let text = random_pattern_text(&mut rng, shape);
        let pattern = parse_pattern(&text);
        let trace = random_trace(&mut rng, 8);
        let got = compile_automaton(&pattern).accepts(&trace);
        ensure(got == oracle_accepts(&pattern, &trace), format!("{text} disagrees with the oracle"))?;
        accepted += got as usize;
    }

    let c = parse_constraint("z = (x:p)-[:w]->(u:t)[-[:r]->(:d)]+(y:d & i); {} => {false}").unwrap();
    let automaton = compile_automaton(&c.patterns[0].1);
    let item = |labels: &[&str], fw: bool| TraceItem {
        labels: labels.iter().map(|l| l.to_string()).collect(),
        direction: fw.then_some(pgrepair::graph::Direction::Forward),
    };
    let mut trace = vec![
        item(&["p"], false),
        item(&["w"], true),
        item(&["t"], false),
        item(&["r"], true),
        item(&["d", "i"], false),
        item(&["r"], true),
        item(&["d", "i"], false),
    ];
    ensure(automaton.accepts(&trace), "example trace rejected")?;
    trace[6] = item(&["d"], false);
    ensure(!automaton.accepts(&trace), "trace without the final i accepted")?;
    Ok(format!("100/100 agree ({accepted} accepted); example trace accepted, rejected without final i"))
}

fn criterion_7() -> Outcome {
    let g = organisation();
    let config = PipelineConfig { neighbourhood_k: Some(1), ..PipelineConfig::new(now()) };
    let outcome = run_pipeline_traced(&g, &[running()], &config).map_err(|e| e.to_string())?;
    let set = |xs: &[&str]| -> BTreeSet<Vertex> {
        xs.iter()
            .map(|x| match x.as_bytes()[0] {
                b'w' | b'r' => Vertex::Edge(EdgeId(x.to_string())),
                _ => Vertex::Node(NodeId(x.to_string())),
            })
            .collect()
    };
    let want = [set(&["p1", "w1", "t1", "d1", "r3", "d3"]), set(&["p1", "w1", "t1", "d1", "r4", "d3"])];
    let got = outcome.hypergraphs.first().ok_or("no hypergraph")?.hyperedges();
    ensure(got == want, format!("hyperedges {:?}", got.iter().map(ids).collect::<Vec<_>>()))?;
    let report = &outcome.report;
    ensure(report.verification.satisfied, "repair does not satisfy the constraint")?;
    ensure(report.solver_status == SolverStatus::Approximate, "status is not approximate")?;
    Ok(format!(
        "both 1-neighbourhoods without r1; {} deletion(s), weight {}, approximate",
        report.deletions.len(),
        report.total_weight
    ))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let graph = dir.path().join("graph.json");
    let rgpc = dir.path().join("constraints.rgpc");
    std::fs::write(&graph, ORGANISATION_JSON).unwrap();
    std::fs::write(&rgpc, RUNNING_RGPC).unwrap();
    let mut reports = Vec::new();
    for (i, extra) in [[].as_slice(), &["--sample", "1"], &["--labels"]].iter().cycle().take(6).enumerate() {
        let report = dir.path().join(format!("report{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_pgrepair"))
            .args(["--graph", graph.to_str().unwrap(), "--constraints", rgpc.to_str().unwrap()])
            .args(["--now", "2025-01-01T00:00:00Z", "--seed", "17", "--report", report.to_str().unwrap()])
            .args(*extra)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code().is_some_and(|c| c <= 1), format!("exit status {:?}", status.status))?;
        reports.push(std::fs::read(&report).map_err(|e| e.to_string())?);
    }
    for i in 0..3 {
        ensure(reports[i] == reports[i + 3], format!("run {i} differs between invocations"))?;
    }
    Ok("3 configurations x 2 runs, byte-identical reports".into())
}

fn main() -> ExitCode {
    let (c4, c8) = criterion_4_and_8();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 running example, base pipeline", criterion_1()),
        ("2 running example, label mode", criterion_2()),
        ("3 naive greedy suboptimality witness", criterion_3()),
        ("4 ILP equals exhaustive oracle, LP below ILP", c4),
        ("5 random repairs satisfied and single-object maximal", criterion_5()),
        ("6 automaton acceptance equals recursive oracle", criterion_6()),
        ("7 neighbourhood errors", criterion_7()),
        ("8 solver ordering", c8),
        ("9 CLI determinism", criterion_9()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
