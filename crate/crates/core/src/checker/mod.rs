//! Verification driver: summary instantiation, path-condition checks and
//! shape-hole solving.

mod check;
mod instantiate;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::cfg::{eliminate_loops, lower, FunctionCfg};
use crate::frontend::Program;
use crate::smt::SolverError;
use crate::symexec::{summarize, FunctionSummary, Warning};

pub use check::{
    check_path, check_system, enumerate_path_conditions, recheck_core, solve_holes, CheckOptions, CheckReport,
    Contradiction, Feasibility, HoleKind, HoleSolution, PathReport, PathVerdict, QueryRecord,
};
pub use instantiate::{dump_system, instantiate, Frame, InstantiatedSystem, DEFAULT_BUDGET};

/// Loop-free CFGs and summaries of every function of a program.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Function names in program order.
    pub order: Vec<String>,
    pub cfgs: BTreeMap<String, FunctionCfg>,
    pub summaries: BTreeMap<String, FunctionSummary>,
    pub warnings: Vec<Warning>,
}

/// Lower, eliminate loops and summarize every function. Functions whose
/// loops cannot be eliminated get no summary and a warning.
pub fn analyze(program: &Program) -> Analysis {
    let mut a = Analysis { order: vec![], cfgs: BTreeMap::new(), summaries: BTreeMap::new(), warnings: vec![] };
    for f in &program.functions {
        a.order.push(f.name.clone());
        match eliminate_loops(lower(f)) {
            Ok(cfg) => {
                let s = summarize(&cfg);
                a.warnings.extend(s.warnings.iter().cloned());
                a.summaries.insert(f.name.clone(), s);
                a.cfgs.insert(f.name.clone(), cfg);
            }
            Err(e) => a.warnings.push(Warning { loc: f.loc.clone(), message: e.to_string() }),
        }
    }
    a
}

impl Analysis {
    /// Functions called by no other function, plus `main`, in program order.
    pub fn entry_points(&self) -> Vec<String> {
        let mut called = BTreeSet::new();
        for s in self.summaries.values() {
            for c in &s.calls {
                if c.callee != s.name {
                    called.insert(c.callee.as_str());
                }
            }
        }
        self.order.iter().filter(|f| *f == "main" || !called.contains(f.as_str())).cloned().collect()
    }

    pub fn system(&self, entry: &str, budget: usize) -> Option<InstantiatedSystem> {
        Some(instantiate(self.summaries.get(entry)?, &self.summaries, budget))
    }

    pub fn check_entry(&self, entry: &str, opts: &CheckOptions) -> Option<Result<CheckReport, SolverError>> {
        self.system(entry, DEFAULT_BUDGET).map(|sys| check_system(sys, opts))
    }
}

/// Map `f` over `items` on up to `jobs` threads, keeping the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every item is mapped")).collect()
}
