use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::*;

fn reachable(cfg: &FunctionCfg) -> Vec<BlockId> {
    // reverse postorder from the entry
    let mut seen = BTreeSet::new();
    let mut post = Vec::new();
    let mut stack = vec![(cfg.entry, 0usize)];
    seen.insert(cfg.entry);
    while let Some((b, i)) = stack.pop() {
        let succs = cfg.blocks[&b].terminator.successors();
        if i < succs.len() {
            stack.push((b, i + 1));
            let s = succs[i];
            if seen.insert(s) {
                stack.push((s, 0));
            }
        } else {
            post.push(b);
        }
    }
    post.reverse();
    post
}

/// Dominator sets for blocks reachable from the entry.
pub(crate) fn dominators(cfg: &FunctionCfg) -> BTreeMap<BlockId, BTreeSet<BlockId>> {
    let order = reachable(cfg);
    let all: BTreeSet<BlockId> = order.iter().copied().collect();
    let preds = cfg.predecessors();
    let mut dom: BTreeMap<BlockId, BTreeSet<BlockId>> = order.iter().map(|b| (*b, all.clone())).collect();
    dom.insert(cfg.entry, [cfg.entry].into());
    let mut changed = true;
    while changed {
        changed = false;
        for b in order.iter().skip(1) {
            let mut new: Option<BTreeSet<BlockId>> = None;
            for p in preds[b].iter().filter(|p| all.contains(p)) {
                new = Some(match new {
                    None => dom[p].clone(),
                    Some(acc) => acc.intersection(&dom[p]).copied().collect(),
                });
            }
            let mut new = new.unwrap_or_default();
            new.insert(*b);
            if new != dom[b] {
                dom.insert(*b, new);
                changed = true;
            }
        }
    }
    dom
}

/// Blocks in an order where every edge goes forward, or `None` if the graph has a cycle.
pub fn topo_order(cfg: &FunctionCfg) -> Option<Vec<BlockId>> {
    let preds = cfg.predecessors();
    let mut indeg: BTreeMap<BlockId, usize> = preds.iter().map(|(b, p)| (*b, p.len())).collect();
    let mut ready: Vec<BlockId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(b, _)| *b).collect();
    ready.sort_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    while let Some(b) = ready.pop() {
        out.push(b);
        let mut succs = cfg.blocks[&b].terminator.successors();
        succs.sort();
        succs.dedup();
        for s in succs {
            let d = indeg.get_mut(&s).unwrap();
            *d -= preds[&s].contains(&b) as usize;
            if *d == 0 {
                ready.push(s);
                ready.sort_by(|a, b| b.cmp(a));
            }
        }
    }
    (out.len() == cfg.blocks.len()).then_some(out)
}

pub fn is_acyclic(cfg: &FunctionCfg) -> bool {
    topo_order(cfg).is_some()
}

/// Natural loops keyed by header, after checking that every cycle is one.
fn natural_loops(cfg: &FunctionCfg) -> Result<BTreeMap<BlockId, BTreeSet<BlockId>>, CfgError> {
    let dom = dominators(cfg);
    let preds = cfg.predecessors();

    // A retreating DFS edge whose target does not dominate its source means
    // the cycle has more than one entry.
    let mut on_stack = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut stack = vec![(cfg.entry, 0usize)];
    on_stack.insert(cfg.entry);
    visited.insert(cfg.entry);
    while let Some((b, i)) = stack.pop() {
        let succs = cfg.blocks[&b].terminator.successors();
        if i < succs.len() {
            stack.push((b, i + 1));
            let s = succs[i];
            if on_stack.contains(&s) && !dom[&b].contains(&s) {
                let loc = cfg.blocks[&s].instrs.first().map(|i| i.loc.clone()).unwrap_or_else(|| cfg.loc.clone());
                return Err(CfgError::IrreducibleLoop { function: cfg.name.clone(), loc });
            }
            if visited.insert(s) {
                on_stack.insert(s);
                stack.push((s, 0));
            }
        } else {
            on_stack.remove(&b);
        }
    }

    let mut loops: BTreeMap<BlockId, BTreeSet<BlockId>> = BTreeMap::new();
    for (b, ds) in &dom {
        for s in cfg.blocks[b].terminator.successors() {
            if ds.contains(&s) {
                let body = loops.entry(s).or_insert_with(|| [s].into());
                let mut work = vec![*b];
                while let Some(n) = work.pop() {
                    if body.insert(n) {
                        work.extend(preds[&n].iter().filter(|p| dom.contains_key(p)));
                    }
                }
            }
        }
    }
    Ok(loops)
}

/// Replace every loop by a conditional that either skips it or runs two
/// copies of its body: the first fed the real loop inputs, the second fed
/// fresh, unconstrained inputs. Inner loops are rewritten first, so a body
/// nested at depth `d` ends up with `2^d` copies.
pub fn eliminate_loops(mut cfg: FunctionCfg) -> Result<FunctionCfg, CfgError> {
    loop {
        let loops = natural_loops(&cfg)?;
        let innermost = loops
            .iter()
            .find(|(h, body)| !loops.keys().any(|h2| h2 != *h && body.contains(h2)));
        let Some((header, body)) = innermost else { break };
        let (header, body) = (*header, body.clone());
        rewrite_loop(&mut cfg, header, &body)?;
    }
    // drop fresh values whose users were all replaced by copies
    let used: BTreeSet<ValueId> = cfg
        .blocks
        .values()
        .flat_map(|b| b.instrs.iter().flat_map(|i| i.op.operands()).chain(b.terminator.operands()))
        .collect();
    cfg.fresh.retain(|v, _| used.contains(v));
    Ok(cfg)
}

fn defined_in(cfg: &FunctionCfg, blocks: &BTreeSet<BlockId>) -> BTreeSet<ValueId> {
    let mut defs = BTreeSet::new();
    for b in blocks {
        let blk = &cfg.blocks[b];
        defs.extend(&blk.params);
        defs.extend(blk.instrs.iter().filter_map(|i| i.dest));
    }
    defs
}

fn rewrite_loop(cfg: &mut FunctionCfg, header: BlockId, body: &BTreeSet<BlockId>) -> Result<(), CfgError> {
    let unsupported = || CfgError::UnsupportedLoop { function: cfg.name.clone(), header };
    if header == cfg.entry {
        return Err(unsupported());
    }
    let Terminator::CondJump { then_edge, else_edge, .. } = cfg.blocks[&header].terminator.clone() else {
        return Err(unsupported());
    };
    let (in_edge, exit_edge) = match (body.contains(&then_edge.target), body.contains(&else_edge.target)) {
        (true, false) => (then_edge, else_edge),
        (false, true) => (else_edge, then_edge),
        _ => return Err(unsupported()),
    };

    let defs = defined_in(cfg, body);
    for b in cfg.blocks.values().filter(|b| !body.contains(&b.id)) {
        let uses = b.instrs.iter().flat_map(|i| i.op.operands()).chain(b.terminator.operands());
        for u in uses {
            if defs.contains(&u) {
                return Err(CfgError::OpenLoop { function: cfg.name.clone(), value: cfg.value(u).name.clone() });
            }
        }
    }
    // fresh values from already-rewritten inner loops get one clone per copy
    let inner_fresh: BTreeSet<ValueId> = body
        .iter()
        .flat_map(|b| {
            let blk = &cfg.blocks[b];
            blk.instrs.iter().flat_map(|i| i.op.operands()).chain(blk.terminator.operands()).collect::<Vec<_>>()
        })
        .filter(|v| cfg.fresh.contains_key(v))
        .collect();

    let mut next_block = cfg.next_block_id().0;
    let mut alloc_blocks = || -> BTreeMap<BlockId, BlockId> {
        body.iter()
            .map(|b| {
                let id = BlockId(next_block);
                next_block += 1;
                (*b, id)
            })
            .collect()
    };
    let blocks_a = alloc_blocks();
    let blocks_b = alloc_blocks();
    let exit_block = BlockId(next_block);

    let clone_values = |cfg: &mut FunctionCfg, values: &BTreeSet<ValueId>, suffix: &str| -> HashMap<ValueId, ValueId> {
        values
            .iter()
            .map(|v| {
                let info = cfg.value(*v).clone();
                let nv = cfg.new_value(info.ty, format!("{}{suffix}", info.name));
                if let Some(kind) = cfg.fresh.get(v).copied() {
                    cfg.fresh.insert(nv, kind);
                }
                (*v, nv)
            })
            .collect()
    };
    let mut copied: BTreeSet<ValueId> = defs.clone();
    copied.extend(&inner_fresh);
    let vals_a = clone_values(cfg, &copied, "a");
    let vals_b = clone_values(cfg, &copied, "b");
    let header_blk = cfg.blocks[&header].clone();
    let header_defs: BTreeSet<ValueId> =
        header_blk.params.iter().copied().chain(header_blk.instrs.iter().filter_map(|i| i.dest)).collect();
    let vals_x = clone_values(cfg, &header_defs, "x");

    let guard = cfg.new_value(Type::Bool, String::new());
    cfg.values[guard.0 as usize].name = format!("g{}", guard.0);
    cfg.fresh.insert(guard, FreshKind::LoopGuard);
    for p in &header_blk.params {
        cfg.fresh.insert(vals_b[p], FreshKind::LoopCarried);
    }

    let map = |m: &HashMap<ValueId, ValueId>, v: ValueId| m.get(&v).copied().unwrap_or(v);
    let map_instrs = |instrs: &[Instr], m: &HashMap<ValueId, ValueId>| -> Vec<Instr> {
        instrs
            .iter()
            .map(|i| Instr { dest: i.dest.map(|d| map(m, d)), op: i.op.map_operands(|v| map(m, v)), loc: i.loc.clone() })
            .collect()
    };
    let header_a = blocks_a[&header];
    let header_b = blocks_b[&header];

    let mut new_blocks = Vec::new();
    for (copy, blocks, vals) in [(0, &blocks_a, &vals_a), (1, &blocks_b, &vals_b)] {
        let map_edge = |e: &Edge| -> Edge {
            if e.target == header {
                if copy == 0 {
                    Edge { target: header_b, args: vec![] }
                } else {
                    Edge { target: exit_block, args: e.args.iter().map(|a| map(vals, *a)).collect() }
                }
            } else {
                Edge {
                    target: blocks.get(&e.target).copied().unwrap_or(e.target),
                    args: e.args.iter().map(|a| map(vals, *a)).collect(),
                }
            }
        };
        for b in body {
            let orig = &cfg.blocks[b];
            let mut params: Vec<ValueId> = orig.params.iter().map(|p| map(vals, *p)).collect();
            let terminator = if *b == header {
                if copy == 0 {
                    Terminator::CondJump {
                        cond: guard,
                        then_edge: map_edge(&in_edge),
                        else_edge: map_edge(&exit_edge),
                    }
                } else {
                    params.clear();
                    Terminator::Jump(map_edge(&in_edge))
                }
            } else {
                match &orig.terminator {
                    Terminator::Jump(e) => Terminator::Jump(map_edge(e)),
                    Terminator::CondJump { cond, then_edge, else_edge } => Terminator::CondJump {
                        cond: map(vals, *cond),
                        then_edge: map_edge(then_edge),
                        else_edge: map_edge(else_edge),
                    },
                    Terminator::Return(r) => Terminator::Return(r.map(|r| map(vals, r))),
                }
            };
            new_blocks.push(Block { id: blocks[b], params, instrs: map_instrs(&orig.instrs, vals), terminator });
        }
    }
    new_blocks.push(Block {
        id: exit_block,
        params: header_blk.params.iter().map(|p| map(&vals_x, *p)).collect(),
        instrs: map_instrs(&header_blk.instrs, &vals_x),
        terminator: Terminator::Jump(Edge {
            target: exit_edge.target,
            args: exit_edge.args.iter().map(|a| map(&vals_x, *a)).collect(),
        }),
    });

    for b in body {
        cfg.blocks.remove(b);
    }
    for blk in cfg.blocks.values_mut() {
        for e in blk.terminator.edges_mut() {
            if e.target == header {
                e.target = header_a;
            }
        }
    }
    for blk in new_blocks {
        cfg.blocks.insert(blk.id, blk);
    }
    Ok(())
}
