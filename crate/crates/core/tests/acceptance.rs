mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{conic_cases, point_graph, tsp_spec, Expect};
use gcs_core::ilp::{BinaryVar, Incidence};
use gcs_core::micp::{product_residual, ConstraintRole, Formulation};
use gcs_core::problems::generate::{self, CostNorm, GenConfig, Instance};
use gcs_core::problems::{
    enumerate_candidates, formulate, oracle_enumerate, ProblemKind, ProblemSpec,
};
use gcs_core::solver::{
    relative_gap, solve_conic, solve_micp, solve_relaxation, BnbConfig, ConicStatus, SolveStatus,
};
use gcs_core::{GcsGraph, VertexId};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [(&str, usize); 6] = [
    ("spp", 8),
    ("tsp", 7),
    ("mstp", 6),
    ("msap", 6),
    ("flp", 7),
    ("bmp", 8),
];
const SEEDS: u64 = 20;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "[{}] criterion {id}: {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn agree(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn admissible(graph: &GcsGraph, spec: &ProblemSpec) -> Vec<Incidence> {
    enumerate_candidates(graph, spec).unwrap()
}

/// Largest violation of any cut over all admissible incidence vectors.
fn worst_cut_violation(
    graph: &GcsGraph,
    spec: &ProblemSpec,
    cuts: &[gcs_core::ilp::AffineConstraint],
) -> f64 {
    if cuts.is_empty() {
        return 0.0;
    }
    let n = graph.num_vertices();
    admissible(graph, spec)
        .iter()
        .map(|c| {
            let y = c.to_flat();
            cuts.iter()
                .map(|cut| cut.violation(&y, n))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn demo(r: &mut Report) {
    let d = generate::demo_spp();
    let start = Instant::now();
    let p = formulate(&d.graph, &d.spec, Formulation::Tailored).unwrap();
    let res = solve_micp(&d.graph, &p, &BnbConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let v = d.graph.vertex_id("(0, 1)").unwrap();
    let x = res.x.get(&v).cloned().unwrap_or_default();
    let want = [0.24413563, 0.82565037];
    let point_ok = x.len() == 2 && x.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-4);
    let ok = res.status == SolveStatus::Optimal
        && (res.value - 2.4561622478270677).abs() <= 1e-5
        && point_ok
        && secs < 5.0;
    r.line(
        1,
        "demo shortest path",
        ok,
        format!("value {:.10}, x(0,1) = {x:.8?}, {secs:.3} s", res.value),
    );
}

/// Runs the oracle suite and returns the largest violation of any emitted cut
/// over the admissible incidence vectors of its instance.
fn oracle_suite(r: &mut Report) -> f64 {
    let start = Instant::now();
    let mut all_ok = true;
    let mut details = Vec::new();
    let mut products = 0.0_f64;
    let mut cut_violation = 0.0_f64;
    for (kind, n) in KINDS {
        let mut worst = 0.0_f64;
        let mut ok = true;
        for seed in 0..SEEDS {
            let inst = generate::by_name(kind, &GenConfig::varied(seed, n)).unwrap();
            let p = formulate(&inst.graph, &inst.spec, Formulation::Tailored).unwrap();
            let res = solve_micp(&inst.graph, &p, &BnbConfig::default()).unwrap();
            let o = oracle_enumerate(&inst.graph, &inst.spec, 4).unwrap();
            if !agree(res.value, o.value, 1e-5) {
                ok = false;
                println!(
                    "  {kind} seed {seed}: micp {} oracle {}",
                    res.value, o.value
                );
            } else if o.value.is_finite() {
                worst = worst.max((res.value - o.value).abs() / o.value.abs().max(1.0));
            }
            if let Some(point) = &res.point {
                products = products.max(product_residual(&p, point));
            }
            cut_violation =
                cut_violation.max(worst_cut_violation(&inst.graph, &inst.spec, &res.cuts));
        }
        all_ok &= ok;
        details.push(format!("{kind} {worst:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        2,
        "oracle equivalence",
        all_ok && secs < 600.0,
        format!(
            "{} seeds per kind, worst relative error {}, {secs:.1} s",
            SEEDS,
            details.join(", ")
        ),
    );
    r.line(
        3,
        "z_v^e = y_e z_v at binary optima",
        products <= 1e-6,
        format!("max residual {products:.2e}"),
    );
    cut_violation
}

fn bmp_exact(r: &mut Report) {
    let mut worst = [0.0_f64; 2];
    for (k, linear) in [false, true].into_iter().enumerate() {
        for seed in 0..SEEDS {
            let mut cfg = GenConfig::varied(seed, 8);
            if linear {
                cfg.norm = CostNorm::Linear;
            }
            let i = generate::bmp(&cfg).unwrap();
            let p = formulate(&i.graph, &i.spec, Formulation::Tailored).unwrap();
            let res = solve_micp(&i.graph, &p, &BnbConfig::default()).unwrap();
            let root = solve_relaxation(&p).value;
            worst[k] = worst[k].max((root - res.value).abs() / res.value.abs().max(1.0));
        }
    }
    r.line(
        4,
        "matching relaxation is exact",
        worst.iter().all(|&w| w <= 1e-6),
        format!(
            "max relative gap {:.2e} with norm costs, {:.2e} with linear costs",
            worst[0], worst[1]
        ),
    );
}

fn sandwich(r: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in ["spp", "tsp"] {
        let (mut dominance, mut bound) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for seed in 0..SEEDS {
            let i = generate::by_name(kind, &GenConfig::varied(seed, 6)).unwrap();
            let t = formulate(&i.graph, &i.spec, Formulation::Tailored).unwrap();
            let m = formulate(&i.graph, &i.spec, Formulation::McCormick).unwrap();
            let opt = solve_micp(&i.graph, &t, &BnbConfig::default())
                .unwrap()
                .value;
            let (rt, rm) = (solve_relaxation(&t).value, solve_relaxation(&m).value);
            dominance = dominance.max(rm - rt);
            bound = bound.max(rt - opt);
        }
        ok &= dominance <= 1e-7 && bound <= 1e-7;
        detail.push(format!(
            "{kind}: max(mc - tailored) {dominance:.1e}, max(tailored - opt) {bound:.1e}"
        ));
    }
    r.line(5, "relaxation sandwich", ok, detail.join("; "));
}

fn structure(r: &mut Report) {
    let d = generate::demo_spp();
    let spp = formulate(&d.graph, &d.spec, Formulation::Tailored).unwrap();
    let spp_rows = spp.count_role(|c| matches!(c, ConstraintRole::IncidenceComplement { .. }));

    let msap = generate::msap(&GenConfig::new(0, 5)).unwrap();
    let mp = formulate(&msap.graph, &msap.spec, Formulation::Tailored).unwrap();
    let got: BTreeSet<_> = mp
        .constraints
        .iter()
        .filter_map(|(_, role)| match role {
            ConstraintRole::IncidenceComplement { vertex, edge } => Some((*vertex, *edge)),
            _ => None,
        })
        .collect();
    // Edges into the root are fixed to zero and carry no rows at all.
    let ProblemKind::Msap { root } = msap.spec.kind else {
        unreachable!()
    };
    let outgoing: BTreeSet<_> = msap
        .graph
        .vertex_ids()
        .flat_map(|v| msap.graph.outgoing(v).iter().map(move |&e| (v, e)))
        .filter(|&(_, e)| msap.graph.edge(e).head != root)
        .collect();

    let tsp = generate::tsp(&GenConfig::new(0, 5)).unwrap();
    let tp = formulate(&tsp.graph, &tsp.spec, Formulation::Tailored).unwrap();
    let fixed = tsp
        .graph
        .vertex_ids()
        .all(|v| tp.fixes.get(&BinaryVar::Vertex(v)) == Some(&true));

    let ok = spp_rows == 0 && got == outgoing && fixed;
    r.line(
        6,
        "tailoring structure",
        ok,
        format!(
            "spp complement rows {spp_rows}; msap complement rows {} for {} outgoing incidences (equal: {}); tsp vertices fixed: {fixed}",
            got.len(),
            outgoing.len(),
            got == outgoing
        ),
    );
}

/// Connected components of the edges with `y_e > 0.5`.
fn components(graph: &GcsGraph, y: &[f64]) -> usize {
    let n = graph.num_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (e, edge) in graph.edges() {
        if y[n + e.0] > 0.5 {
            let (a, b) = (
                find(&mut parent, edge.tail.0),
                find(&mut parent, edge.head.0),
            );
            parent[a] = b;
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

fn lazy_case(graph: &GcsGraph, spec: &ProblemSpec) -> (usize, bool, usize, f64, bool) {
    let p = formulate(graph, spec, Formulation::Tailored).unwrap();
    let root = solve_relaxation(&p);
    let bins = &root.x[p.layout.binaries()];
    let root_parts = components(graph, bins);
    let res = solve_micp(graph, &p, &BnbConfig::default()).unwrap();
    let cands = admissible(graph, spec);
    let final_ok = res.status == SolveStatus::Optimal
        && res.subgraph.as_ref().is_some_and(|s| {
            cands.iter().any(|c| c.edges == s.edges) && components(graph, &s.to_flat()) == 1
        });
    let violation = worst_cut_violation(graph, spec, &res.cuts);
    let o = oracle_enumerate(graph, spec, 2).unwrap();
    (
        root_parts,
        final_ok,
        res.cuts.len(),
        violation,
        agree(res.value, o.value, 1e-5),
    )
}

fn lazy(r: &mut Report, suite_violation: f64) {
    let tsp = point_graph(
        &[
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.8],
            [10.0, 0.0],
            [11.0, 0.0],
            [10.5, 0.8],
        ],
        false,
    );
    let (tp, tf, tc, tv, ta) = lazy_case(&tsp, &tsp_spec());
    let msap = point_graph(
        &[
            [0.0, 0.0],
            [10.0, 0.0],
            [10.5, 0.3],
            [0.0, 10.0],
            [0.3, 10.5],
        ],
        true,
    );
    let spec = ProblemSpec::new(ProblemKind::Msap { root: VertexId(0) });
    let (mp, mf, mc, mv, ma) = lazy_case(&msap, &spec);
    let ok = tp == 2
        && tf
        && tc > 0
        && ta
        && mp >= 2
        && mf
        && mc > 0
        && ma
        && tv <= 1e-9
        && mv <= 1e-9
        && suite_violation <= 1e-9;
    r.line(
        7,
        "lazy cuts terminate",
        ok,
        format!(
            "tsp: {tp} root components, {tc} cuts, single tour {tf}, max cut violation {tv:.1e}; \
             msap: {mp} root components, {mc} cuts, arborescence {mf}, max cut violation {mv:.1e}; \
             oracle-suite cuts max violation {suite_violation:.1e}"
        ),
    );
}

fn role_vertices(inst: &Instance) -> Vec<VertexId> {
    match &inst.spec.kind {
        ProblemKind::Spp { source, target } => vec![*source, *target],
        ProblemKind::Msap { root } => vec![*root],
        _ => Vec::new(),
    }
}

/// Random connected vertex subsets of at most `size` vertices, grown from the
/// problem roles, that keep the roles.
fn shards(inst: &Instance, size: usize, count: usize) -> Vec<Instance> {
    let g = &inst.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let roles = role_vertices(inst);
    let mut out = Vec::new();
    for _ in 0..50 {
        if out.len() == count {
            break;
        }
        let mut keep = if roles.is_empty() {
            vec![VertexId(0)]
        } else {
            roles.clone()
        };
        while keep.len() < size {
            let mut frontier: Vec<VertexId> = keep
                .iter()
                .flat_map(|&v| g.incident(v).into_iter().map(move |e| g.edge(e).other(v)))
                .filter(|w| !keep.contains(w))
                .collect();
            frontier.sort();
            frontier.dedup();
            match frontier.choose(&mut rng) {
                Some(&w) => keep.push(w),
                None => break,
            }
        }
        keep.sort();
        if let Some(s) = generate::shard(inst, &keep) {
            out.push(s);
        }
    }
    out
}

fn scenarios(r: &mut Report) {
    let cases: Vec<(Instance, usize)> = vec![
        (generate::helicopter(3, 20).unwrap(), 8),
        (generate::school_bus(3, 9).unwrap(), 7),
        (generate::camera(3, 4, 4).unwrap(), 8),
        (generate::circle_cover(3, 3, 8).unwrap(), 8),
    ];
    let cfg = BnbConfig {
        time_limit: Some(Duration::from_secs(120)),
        ..BnbConfig::default()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (inst, size) in &cases {
        let p = formulate(&inst.graph, &inst.spec, Formulation::Tailored).unwrap();
        let res = solve_micp(&inst.graph, &p, &cfg).unwrap();
        let monotone = res.bound_trace.windows(2).all(|w| {
            w[1].lower_bound >= w[0].lower_bound - 1e-9
                && w[1].upper_bound <= w[0].upper_bound + 1e-9
        });
        let gap = res.gap();
        let gap_ok = gap.is_finite()
            && (res.status != SolveStatus::Optimal || gap <= cfg.relative_gap + 1e-9);
        let consistent = (gap - relative_gap(res.lower_bound(), res.value)).abs() <= 1e-12;
        let mut shard_ok = true;
        let mut feasible = 0;
        let pieces = shards(inst, *size, 3);
        for s in &pieces {
            let sp = formulate(&s.graph, &s.spec, Formulation::Tailored).unwrap();
            let sr = solve_micp(&s.graph, &sp, &BnbConfig::default()).unwrap();
            let o = oracle_enumerate(&s.graph, &s.spec, 4).unwrap();
            feasible += usize::from(o.value.is_finite());
            if !agree(sr.value, o.value, 1e-5) {
                shard_ok = false;
                println!(
                    "  {} shard: micp {} oracle {}",
                    inst.name, sr.value, o.value
                );
            }
        }
        ok &= monotone
            && gap_ok
            && consistent
            && shard_ok
            && pieces.len() == 3
            && feasible > 0
            && !res.bound_trace.is_empty();
        detail.push(format!(
            "{} {:?} value {:.4} relaxation {:.4} gap {:.1e} nodes {} trace monotone {monotone}, {} shards ({feasible} feasible) agree {shard_ok}",
            inst.name,
            res.status,
            res.value,
            res.relaxation_value,
            gap,
            res.nodes,
            pieces.len()
        ));
    }
    r.line(8, "seeded scenario analogues", ok, detail.join("; "));
}

fn conic(r: &mut Report) {
    let cases = conic_cases();
    let total = cases.len();
    let mut worst = 0.0_f64;
    let mut failed = Vec::new();
    for case in cases {
        let sol = solve_conic(&case.program);
        let ok = match case.expect {
            Expect::Value(v) => {
                let err = (sol.value - v).abs();
                worst = worst.max(err);
                sol.status == ConicStatus::Optimal && err <= 1e-6
            }
            Expect::Status(s) => sol.status == s,
        };
        if !ok {
            failed.push(case.name);
        }
    }
    r.line(
        9,
        "conic solver suite",
        total == 30 && failed.is_empty(),
        format!("{total} instances, max error {worst:.1e}, failed {failed:?}"),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    demo(&mut r);
    let suite_violation = oracle_suite(&mut r);
    bmp_exact(&mut r);
    sandwich(&mut r);
    structure(&mut r);
    lazy(&mut r, suite_violation);
    scenarios(&mut r);
    conic(&mut r);
    if r.failures > 0 {
        println!("{} acceptance check(s) failed", r.failures);
        std::process::exit(1);
    }
    println!("all acceptance checks passed");
}
