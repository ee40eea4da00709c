//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to the real
//! standard output (bypassing the harness capture) and fails on `FAIL`.
//! The criteria run one at a time so that their timings do not interfere.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tfit::checker::{analyze, check_path, recheck_core, CheckOptions, Feasibility, PathVerdict};
use tfit::cli::main_with;
use tfit::constraints::BoolExpr;
use tfit::frontend::parse_source;
use tfit::smt::{Solver, Status, TranslateConfig};

use common::broadcast::{all_shapes, mismatches};
use common::{check_all, corpus, corpus_program, differential_one, gen, meets, Differential, Expect};

static SERIAL: Mutex<()> = Mutex::new(());

type Verdict = Result<String, String>;

fn criterion(id: &str, title: &str, body: impl FnOnce() -> Verdict) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let verdict = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(v) => v,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    let (tag, detail) = match &verdict {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let line = format!("[{tag}] criterion {id}: {title} -- {}\n", detail.replace('\n', " | "));
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    if let Err(d) = verdict {
        panic!("criterion {id} failed: {d}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn tfit(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("tfit").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

/// Snippet of `line` in the report layout: the numbered line with two
/// neighbours, the gutter `indent + 4` wide.
fn snippet(source: &str, line: usize, indent: usize) -> String {
    let lines: Vec<&str> = source.lines().collect();
    let width = indent + 4;
    let mut out = String::new();
    for n in line.saturating_sub(1).max(1)..=(line + 1).min(lines.len()) {
        let text = lines[n - 1];
        let gutter = if n == line { format!("{n:>width$}") } else { " ".repeat(width) };
        out.push_str(format!("{gutter}  | {text}").trim_end());
        out.push('\n');
    }
    out
}

#[test]
fn criterion_1_single_contradiction_for_matmul() {
    criterion("1", "the matmul mismatch yields one `10 = 30` contradiction in the report layout", || {
        let p = corpus_program("matmul_mismatch");
        let file = p.file();
        let start = Instant::now();
        let r = tfit(&["check", &file]);
        let took = start.elapsed();
        let expected = format!("In main():\nSomething doesn't fit!\n  - 10 = 30\n      Asserted at {file}:2\n{}", snippet(&p.source, 2, 6));
        ensure(r.code == 1, || format!("exit code {}", r.code))?;
        ensure(r.out == expected, || format!("output differs:\n{}\nexpected:\n{expected}", r.out))?;
        ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
        let json = tfit(&["check", "--format", "json", &file]);
        let v: Value = serde_json::from_str(&json.out).map_err(|e| e.to_string())?;
        let contradictions: Vec<&Value> = v[0]["findings"].as_array().unwrap().iter().filter(|f| f["kind"] == "contradiction").collect();
        ensure(contradictions.len() == 1, || format!("{} contradictions", contradictions.len()))?;
        let facts = contradictions[0]["facts"].as_array().unwrap();
        ensure(facts.len() == 1 && facts[0]["expr"] == "10 = 30" && facts[0]["line"] == 2, || format!("facts {facts:?}"))?;
        Ok(format!("exit 1, one fact `10 = 30` at line 2, {took:.2?}"))
    });
}

#[test]
fn criterion_2_holes() {
    criterion("2", "matmul holes: one forced to 10 by an unsat blocking query, the other with examples", || {
        let p = corpus_program("matmul_holes");
        let file = p.file();
        let line2 = p.source.lines().nth(1).unwrap();
        let first = line2.find("____").unwrap() + 1;
        let second = line2.rfind("____").unwrap() + 1;
        let r = tfit(&["check", &file]);
        ensure(r.code == 0, || format!("exit code {}", r.code))?;
        let snip = snippet(&p.source, 2, 2);
        let expected = format!(
            "In main() -> ():\n  - The hole at {file}:2:{first} has to be exactly 10\n{snip}  - Some example values that the hole at {file}:2:{second} might take are: 1, 2, 3\n{snip}"
        );
        ensure(r.out == expected, || format!("output differs:\n{}\nexpected:\n{expected}", r.out))?;

        let a = analyze(&parse_source(&p.source, &file).unwrap());
        let report = a.check_entry("main", &CheckOptions::default()).unwrap().map_err(|e| e.to_string())?;
        let h1 = report.holes.iter().find(|h| h.loc.column as usize == first).ok_or("first hole not solved")?;
        let blocking = h1.queries.iter().find(|q| q.label.contains("!=")).ok_or("no blocking query")?;
        ensure(blocking.status == Status::Unsat, || format!("blocking query answered {}", blocking.status))?;
        let h2 = report.holes.iter().find(|h| h.loc.column as usize == second).ok_or("second hole not solved")?;
        ensure(h2.values().len() >= 3, || format!("examples {:?}", h2.values()))?;
        Ok(format!("2:{first} = 10 (`{}` unsat), 2:{second} examples {:?}, exit 0", blocking.label, h2.values()))
    });
}

#[test]
fn criterion_3_loop_summary() {
    criterion("3", "the looping function's summary instantiates the loop body twice, the second on a fresh input", || {
        let p = corpus_program("looping_fn");
        let r = tfit(&["check", "--dump-summaries", "--entry", "loopingFn", &p.file()]);
        let summary: Vec<&str> = r.err.lines().skip_while(|l| !l.starts_with("loopingFn(")).skip(1).take_while(|l| l.starts_with("  ")).collect();
        let calls: Vec<&str> = summary.iter().copied().filter(|l| l.contains("loopOp(")).collect();
        ensure(calls.len() == 2, || format!("loopOp appears {} times:\n{}", calls.len(), summary.join("\n")))?;
        let arg = |l: &str| l[l.find("loopOp(").unwrap() + 7..].split(',').next().unwrap().to_string();
        let (first, second) = (arg(calls[0]), arg(calls[1]));
        let mentions = |v: &str| summary.iter().filter(|l| l.split(|c: char| !c.is_alphanumeric() && c != '@').any(|w| w == v)).count();
        ensure(mentions(&first) > 1, || format!("first input {first} is not tied to the loop entry"))?;
        ensure(mentions(&second) == 1, || format!("second input {second} is constrained elsewhere"))?;
        Ok(format!("loopOp({first}, ..) then loopOp({second}, ..) with {second} fresh"))
    });
}

#[test]
fn criterion_4_feasibility() {
    criterion("4", "the f/g program has no errors and its (x = 1 && y = 2) path is infeasible in phase 1", || {
        let p = corpus_program("fg_feasibility");
        let r = tfit(&["check", "--format", "json", &p.file()]);
        ensure(r.code == 0, || format!("exit code {}", r.code))?;
        let v: Value = serde_json::from_str(&r.out).map_err(|e| e.to_string())?;
        let findings: Vec<&Value> = v.as_array().unwrap().iter().flat_map(|e| e["findings"].as_array().unwrap()).collect();
        ensure(!findings.iter().any(|f| f["kind"] == "contradiction"), || "contradiction reported".into())?;

        // The parameters of f and of the inlined g, by their solver names.
        let a = analyze(&parse_source(&p.source, &p.file()).unwrap());
        let x = a.summaries["f"].args[0].to_string();
        let sys = a.system("f", tfit::checker::DEFAULT_BUDGET).unwrap();
        let y = sys.constraints.iter().find_map(|c| match &c.body {
            BoolExpr::IntEq(l, r) if r.to_string() == x && l.to_string().contains('@') => Some(l.to_string()),
            _ => None,
        });
        let y = y.ok_or("no call glue for g's parameter")?;
        let want = format!("({x} = 1) && ({y} = 2)");
        let hit = findings.iter().find(|f| f["kind"] == "infeasible-warning" && f["condition"] == want.as_str());
        let hit = hit.ok_or_else(|| format!("no infeasible finding for `{want}` in {findings:?}"))?;
        ensure(hit["phase"] == 1, || format!("recorded in phase {}", hit["phase"]))?;
        Ok(format!("exit 0, `{want}` infeasible in phase 1"))
    });
}

#[test]
fn criterion_5_model() {
    criterion("5", "the convolutional model: error at the pooling assertion, passes when fixed, hole = 320", || {
        let bad = corpus_program("conv_model_error");
        let line = bad.source.lines().position(|l| l.contains("|-> [batchSize, 16, 16, 5]")).ok_or("assertion line")? as u32 + 1;
        let opts = CheckOptions::default();
        let diags: Vec<_> = check_all(&bad.source, &bad.file(), &opts).into_iter().flat_map(|(_, _, d)| d).collect();
        ensure(meets(&Expect::Error(line), &diags), || format!("no contradiction at line {line}"))?;

        let fixed = corpus_program("conv_model_hole");
        ensure(bad.source.replace("16, 16, 5]", "8, 8, 5]").lines().take(12).eq(fixed.source.lines().take(12)), || "fixed differs elsewhere".into())?;
        let diags: Vec<_> = check_all(&fixed.source, &fixed.file(), &opts).into_iter().flat_map(|(_, _, d)| d).collect();
        ensure(meets(&Expect::Ok, &diags), || "corrected model still reports an error".into())?;
        let hole_line = fixed.source.lines().position(|l| l.contains("____")).unwrap();
        let col = fixed.source.lines().nth(hole_line).unwrap().find("____").unwrap() as u32 + 1;
        ensure(meets(&Expect::Unique(hole_line as u32 + 1, col, 320), &diags), || {
            format!("hole: {:?}", diags.iter().filter_map(|d| d.hole.as_ref()).collect::<Vec<_>>())
        })?;
        Ok(format!("error at line {line}; fixed version clean; hole {}:{col} = 320", hole_line + 1))
    });
}

#[test]
fn criterion_6a_broadcast_encoding() {
    criterion("6a", "broadcast encoding matches the reference rule for every pair of shapes of rank <= 3, dims 1..4", || {
        let shapes = all_shapes(3, 4);
        let start = Instant::now();
        let bad = mismatches(&shapes, TranslateConfig::default());
        let took = start.elapsed();
        ensure(bad.is_empty(), || format!("{} mismatches, e.g. {:?}", bad.len(), &bad[..bad.len().min(5)]))?;
        ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
        Ok(format!("{} pairs agree in {took:.1?}", shapes.len() * shapes.len()))
    });
}

#[test]
fn criterion_6b_differential_soundness() {
    criterion("6b", "no false positives on 500 random concrete loop-free programs", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7f17);
        let opts = CheckOptions::default();
        let mut stats = Differential::default();
        for i in 0..500 {
            let len = 2 + i % 13;
            differential_one(&gen::program(&mut rng, len), &opts, &mut stats);
        }
        ensure(stats.false_positives.is_empty(), || {
            format!("{} false positives, first:\n{}", stats.false_positives.len(), stats.false_positives[0])
        })?;
        Ok(format!(
            "{} programs: {} run cleanly, all accepted; {} fail at run time, {} of them flagged",
            stats.programs,
            stats.oracle_ok,
            stats.programs - stats.oracle_ok,
            stats.caught
        ))
    });
}

#[test]
fn criterion_6c_elimination_equisatisfiable() {
    criterion("6c", "equality elimination preserves every query verdict on the corpus", || {
        let with = CheckOptions::default();
        let without = CheckOptions { eliminate: false, solver: Solver::new("z3 -in -smt2", Duration::from_secs(3)), ..CheckOptions::default() };
        let (mut compared, mut undecided) = (0, Vec::new());
        for p in corpus() {
            let a = analyze(&parse_source(&p.source, &p.file()).unwrap());
            for entry in a.entry_points() {
                let Some(sys) = a.system(&entry, tfit::checker::DEFAULT_BUDGET) else { continue };
                for cond in tfit::checker::enumerate_path_conditions(&sys) {
                    let x = check_path(&sys, &cond, &with).map_err(|e| e.to_string())?;
                    let y = check_path(&sys, &cond, &without).map_err(|e| e.to_string())?;
                    let class = |r: &tfit::checker::PathReport| match (&r.feasibility, &r.verdict) {
                        (Feasibility::Unknown, _) | (_, PathVerdict::Unknown) => None,
                        (Feasibility::Infeasible, _) => Some("infeasible"),
                        (_, PathVerdict::Contradiction(_)) => Some("contradiction"),
                        _ => Some("ok"),
                    };
                    match (class(&x), class(&y)) {
                        (Some(a), Some(b)) if a != b => return Err(format!("{} {entry} `{cond}`: {a} with elimination, {b} without", p.name)),
                        (Some(_), Some(_)) => compared += 1,
                        (None, _) => return Err(format!("{} {entry} `{cond}` undecided with elimination", p.name)),
                        (_, None) => undecided.push(format!("{}:{entry}", p.name)),
                    }
                }
            }
        }
        Ok(format!("{compared} path checks agree; undecided without elimination: {undecided:?}"))
    });
}

#[test]
fn criterion_6d_cores_are_valid() {
    criterion("6d", "every reported core is unsatisfiable on its own", || {
        let opts = CheckOptions::default();
        let mut checked = 0;
        for p in corpus() {
            for (entry, report, _) in check_all(&p.source, &p.file(), &opts) {
                for (cond, c) in report.contradictions() {
                    let status = recheck_core(&report.system, cond, c, &opts).map_err(|e| e.to_string())?;
                    ensure(status == Status::Unsat, || format!("{} {entry}: core under `{cond}` is {status}", p.name))?;
                    checked += 1;
                }
            }
        }
        ensure(checked > 0, || "no contradictions to recheck".into())?;
        Ok(format!("{checked} cores rechecked unsat"))
    });
}

#[test]
fn criterion_7a_corpus_performance() {
    criterion("7a", "the whole corpus (at least 25 programs) checks in under 60 s", || {
        let programs = corpus();
        ensure(programs.len() >= 25, || format!("only {} programs", programs.len()))?;
        let start = Instant::now();
        let mut failures = Vec::new();
        for p in &programs {
            let r = tfit(&["check", &p.file()]);
            ensure(r.code != 2, || format!("{}: {}", p.name, r.err))?;
            let diags: Vec<_> = check_all(&p.source, &p.file(), &CheckOptions::default()).into_iter().flat_map(|(_, _, d)| d).collect();
            failures.extend(p.expects.iter().filter(|e| !meets(e, &diags)).map(|e| format!("{}: {e:?}", p.name)));
        }
        let took = start.elapsed();
        ensure(failures.is_empty(), || format!("unmet expectations {failures:?}"))?;
        ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
        Ok(format!("{} programs in {took:.1?} (each checked twice)", programs.len()))
    });
}

#[test]
fn criterion_7b_elimination_matters() {
    criterion("7b", "some corpus system times out without equality elimination and is decided with it", || {
        let slow = CheckOptions { eliminate: false, ..CheckOptions::default() };
        let fast = CheckOptions::default();
        let mut found = Vec::new();
        for p in corpus() {
            let a = analyze(&parse_source(&p.source, &p.file()).unwrap());
            for entry in a.entry_points() {
                let without = a.check_entry(&entry, &slow).unwrap().map_err(|e| e.to_string())?;
                let timed_out = without.paths.iter().flat_map(|r| &r.queries).any(|q| q.status == Status::Timeout);
                if !timed_out {
                    continue;
                }
                let start = Instant::now();
                let with = a.check_entry(&entry, &fast).unwrap().map_err(|e| e.to_string())?;
                let took = start.elapsed();
                let decided = with.paths.iter().flat_map(|r| &r.queries).all(|q| matches!(q.status, Status::Sat | Status::Unsat));
                if decided && took < Duration::from_secs(10) {
                    found.push(format!("{}:{entry} decided in {took:.2?}", p.name));
                }
            }
        }
        ensure(!found.is_empty(), || "no system needed elimination".into())?;
        Ok(found.join(", "))
    });
}
