//! Seeded random instances. The same seed always yields the same graph.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ProblemKind, ProblemSpec};
use crate::conic::{AtomKind, Cone, ConicSet, CostAtom};
use crate::error::{GcsError, Result};
use crate::model::{GcsGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostNorm {
    L1,
    L2,
    Linf,
    Squared,
    /// Linear costs on vertices and edges.
    Linear,
}

impl CostNorm {
    pub const NONLINEAR: [CostNorm; 4] = [
        CostNorm::L1,
        CostNorm::L2,
        CostNorm::Linf,
        CostNorm::Squared,
    ];

    fn kind(self) -> AtomKind {
        match self {
            CostNorm::L1 => AtomKind::L1,
            CostNorm::L2 => AtomKind::L2,
            CostNorm::Linf => AtomKind::Linf,
            CostNorm::Squared => AtomKind::SquaredL2,
            CostNorm::Linear => AtomKind::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetShape {
    Box,
    Ball,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub vertices: usize,
    pub dim: usize,
    pub norm: CostNorm,
    pub shape: SetShape,
}

impl GenConfig {
    pub fn new(seed: u64, vertices: usize) -> Self {
        Self {
            seed,
            vertices,
            dim: 2,
            norm: CostNorm::L2,
            shape: SetShape::Mixed,
        }
    }

    /// Cycles through norms and shapes by seed.
    pub fn varied(seed: u64, vertices: usize) -> Self {
        let norm = CostNorm::NONLINEAR[(seed % 4) as usize];
        let shape = [SetShape::Box, SetShape::Ball, SetShape::Mixed][(seed / 4 % 3) as usize];
        Self {
            seed,
            vertices,
            dim: 2,
            norm,
            shape,
        }
    }
}

/// A generated graph together with its problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub graph: GcsGraph,
    pub spec: ProblemSpec,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize, shape: SetShape, extent: f64) -> Result<ConicSet> {
    let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..extent)).collect();
    let ball = match shape {
        SetShape::Ball => true,
        SetShape::Box => false,
        SetShape::Mixed => rng.gen_bool(0.5),
    };
    if ball {
        ConicSet::ball(&center, rng.gen_range(0.2..0.6))
    } else {
        let half: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..0.5)).collect();
        let lo: Vec<f64> = center.iter().zip(&half).map(|(c, h)| c - h).collect();
        let hi: Vec<f64> = center.iter().zip(&half).map(|(c, h)| c + h).collect();
        ConicSet::axis_box(&lo, &hi)
    }
}

fn add_random_vertices(
    g: &mut GcsGraph,
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
    prefix: &str,
    count: usize,
) -> Result<Vec<VertexId>> {
    let extent = 2.0 * (cfg.vertices as f64).sqrt() + 1.0;
    (0..count)
        .map(|i| {
            let v = g.add_vertex(format!("{prefix}{i}"), cfg.dim)?;
            let set = random_set(rng, cfg.dim, cfg.shape, extent)?;
            g.add_vertex_constraint(v, set)?;
            Ok(v)
        })
        .collect()
}

fn edge_atom(rng: &mut ChaCha8Rng, norm: CostNorm, dim: usize) -> Result<CostAtom> {
    match norm {
        CostNorm::Linear => {
            let c: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            CostAtom::linear(&c)
        }
        _ => CostAtom::of_difference(norm.kind(), dim, 0)?.with_weight(rng.gen_range(0.5..1.5)),
    }
}

/// Occasional vertex costs on top of the edge costs.
fn maybe_vertex_cost(
    g: &mut GcsGraph,
    rng: &mut ChaCha8Rng,
    v: VertexId,
    norm: CostNorm,
    dim: usize,
) -> Result<()> {
    if !rng.gen_bool(0.3) {
        return Ok(());
    }
    let atom = match norm {
        CostNorm::Linear => {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            CostAtom::linear(&c)?
        }
        _ => CostAtom::of_identity(norm.kind(), dim)?.with_weight(rng.gen_range(0.1..0.3))?,
    };
    g.add_vertex_cost(v, atom)
}

fn connect(
    g: &mut GcsGraph,
    rng: &mut ChaCha8Rng,
    a: VertexId,
    b: VertexId,
    cfg: &GenConfig,
) -> Result<()> {
    let e = g.add_edge(a, b, 0)?;
    let atom = edge_atom(rng, cfg.norm, cfg.dim)?;
    g.add_edge_cost(e, atom)
}

fn check_size(cfg: &GenConfig, min: usize) -> Result<()> {
    if cfg.vertices < min || cfg.dim == 0 {
        return Err(GcsError::InvalidProblem(format!(
            "generator needs at least {min} vertices and a positive dimension"
        )));
    }
    Ok(())
}

/// Directed graph with a guaranteed chain from the first to the last vertex
/// and random extra edges.
pub fn spp(cfg: &GenConfig) -> Result<Instance> {
    check_size(cfg, 2)?;
    let mut r = rng(cfg.seed);
    let mut g = GcsGraph::new(true);
    let vs = add_random_vertices(&mut g, &mut r, cfg, "v", cfg.vertices)?;
    for &v in &vs {
        maybe_vertex_cost(&mut g, &mut r, v, cfg.norm, cfg.dim)?;
    }
    let n = vs.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && (j == i + 1 || r.gen_bool(0.45)) {
                connect(&mut g, &mut r, vs[i], vs[j], cfg)?;
            }
        }
    }
    Ok(Instance {
        name: format!("spp-{}", cfg.seed),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Spp {
            source: vs[0],
            target: vs[n - 1],
        }),
    })
}

fn complete(cfg: &GenConfig, directed: bool, min: usize) -> Result<(GcsGraph, Vec<VertexId>)> {
    check_size(cfg, min)?;
    let mut r = rng(cfg.seed);
    let mut g = GcsGraph::new(directed);
    let vs = add_random_vertices(&mut g, &mut r, cfg, "v", cfg.vertices)?;
    for &v in &vs {
        maybe_vertex_cost(&mut g, &mut r, v, cfg.norm, cfg.dim)?;
    }
    for &a in &vs {
        for &b in &vs {
            if a != b && (directed || a < b) {
                connect(&mut g, &mut r, a, b, cfg)?;
            }
        }
    }
    Ok((g, vs))
}

pub fn tsp(cfg: &GenConfig) -> Result<Instance> {
    let (graph, _) = complete(cfg, false, 3)?;
    Ok(Instance {
        name: format!("tsp-{}", cfg.seed),
        graph,
        spec: ProblemSpec::new(ProblemKind::Tsp),
    })
}

pub fn mstp(cfg: &GenConfig) -> Result<Instance> {
    let (graph, _) = complete(cfg, false, 2)?;
    Ok(Instance {
        name: format!("mstp-{}", cfg.seed),
        graph,
        spec: ProblemSpec::new(ProblemKind::Mstp),
    })
}

pub fn msap(cfg: &GenConfig) -> Result<Instance> {
    let (graph, vs) = complete(cfg, true, 2)?;
    Ok(Instance {
        name: format!("msap-{}", cfg.seed),
        graph,
        spec: ProblemSpec::new(ProblemKind::Msap { root: vs[0] }),
    })
}

fn bipartite(
    cfg: &GenConfig,
    facilities: usize,
) -> Result<(GcsGraph, Vec<VertexId>, Vec<VertexId>)> {
    if facilities == 0 || facilities >= cfg.vertices {
        return Err(GcsError::InvalidProblem(
            "both sides need at least one vertex".into(),
        ));
    }
    check_size(cfg, 2)?;
    let mut r = rng(cfg.seed);
    let mut g = GcsGraph::new(false);
    let f = add_random_vertices(&mut g, &mut r, cfg, "f", facilities)?;
    let c = add_random_vertices(&mut g, &mut r, cfg, "c", cfg.vertices - facilities)?;
    for &v in f.iter().chain(&c) {
        maybe_vertex_cost(&mut g, &mut r, v, cfg.norm, cfg.dim)?;
    }
    for &a in &f {
        for &b in &c {
            connect(&mut g, &mut r, a, b, cfg)?;
        }
    }
    Ok((g, f, c))
}

pub fn flp(cfg: &GenConfig, facilities: usize) -> Result<Instance> {
    let (graph, f, c) = bipartite(cfg, facilities)?;
    Ok(Instance {
        name: format!("flp-{}", cfg.seed),
        graph,
        spec: ProblemSpec::new(ProblemKind::Flp {
            facilities: f,
            clients: c,
        }),
    })
}

/// Complete bipartite graph with equal sides; `cfg.vertices` must be even.
pub fn bmp(cfg: &GenConfig) -> Result<Instance> {
    if !cfg.vertices.is_multiple_of(2) {
        return Err(GcsError::InvalidProblem(
            "matching needs an even vertex count".into(),
        ));
    }
    let (graph, f, c) = bipartite(cfg, cfg.vertices / 2)?;
    Ok(Instance {
        name: format!("bmp-{}", cfg.seed),
        graph,
        spec: ProblemSpec::new(ProblemKind::Bmp {
            facilities: f,
            clients: c,
        }),
    })
}

/// Generator by problem name.
pub fn by_name(kind: &str, cfg: &GenConfig) -> Result<Instance> {
    match kind {
        "spp" => spp(cfg),
        "tsp" => tsp(cfg),
        "mstp" => mstp(cfg),
        "msap" => msap(cfg),
        "flp" => flp(cfg, (cfg.vertices / 3).max(1)),
        "bmp" => bmp(cfg),
        "helicopter" => helicopter(cfg.seed, cfg.vertices),
        "school_bus" => school_bus(cfg.seed, cfg.vertices),
        "camera" => {
            let side = (cfg.vertices as f64).sqrt().ceil().max(2.0) as usize;
            camera(cfg.seed, side, side)
        }
        "circle_cover" => circle_cover(
            cfg.seed,
            (cfg.vertices / 3).max(1),
            cfg.vertices - (cfg.vertices / 3).max(1),
        ),
        other => Err(GcsError::InvalidProblem(format!(
            "unknown generator `{other}`"
        ))),
    }
}

/// The 3×3 grid of radius-0.3 circles with right and up edges and
/// Euclidean edge lengths, from `(0, 0)` to `(2, 2)`.
pub fn demo_spp() -> Instance {
    let mut g = GcsGraph::new(true);
    let id = |g: &mut GcsGraph, i: usize, j: usize| {
        let v = g.add_vertex(format!("({i}, {j})"), 2).expect("fresh name");
        g.add_vertex_constraint(
            v,
            ConicSet::ball(&[i as f64, j as f64], 0.3).expect("valid ball"),
        )
        .expect("matching dimension");
        v
    };
    let mut grid = [[VertexId(0); 3]; 3];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = id(&mut g, i, j);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let mut next = Vec::new();
            if i + 1 < 3 {
                next.push(grid[i + 1][j]);
            }
            if j + 1 < 3 {
                next.push(grid[i][j + 1]);
            }
            for w in next {
                let e = g.add_edge(grid[i][j], w, 0).expect("fresh edge");
                g.add_edge_cost(
                    e,
                    CostAtom::of_difference(AtomKind::L2, 2, 0).expect("valid atom"),
                )
                .expect("matching dimension");
            }
        }
    }
    Instance {
        name: "demo-spp".into(),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Spp {
            source: grid[0][0],
            target: grid[2][2],
        }),
    }
}

/// Rows `r` of a set in `Rⁿ` with `r·x + d ∈ K`.
fn rows_set(dim: usize, rows: Vec<Vec<f64>>, d: Vec<f64>, cones: Vec<Cone>) -> Result<ConicSet> {
    ConicSet::from_rows(dim, &rows, &d, cones)
}

fn unit(dim: usize, i: usize, v: f64) -> Vec<f64> {
    let mut r = vec![0.0; dim];
    r[i] = v;
    r
}

/// Island hopping: circular islands, a battery that drains during flight
/// at rate `α` per unit time and recharges on islands. A vertex holds
/// `(p, b_arrive, b_leave)`. Recharging costs `(b_leave − b_arrive) / β` and
/// a flight costs its duration `(b_leave_i − b_arrive_j) / α`, which must
/// cover `‖p_j − p_i‖ / s`.
pub fn helicopter(seed: u64, islands: usize) -> Result<Instance> {
    const ALPHA: f64 = 0.2;
    const BETA: f64 = 1.0;
    const SPEED: f64 = 1.0;
    if islands < 2 {
        return Err(GcsError::InvalidProblem("need at least two islands".into()));
    }
    let mut r = rng(seed);
    let extent = 2.2 * (islands as f64).sqrt();
    let mut g = GcsGraph::new(true);
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    for i in 0..islands {
        let center = if i == 0 {
            vec![0.0, 0.0]
        } else if i == islands - 1 {
            vec![extent, extent]
        } else {
            vec![r.gen_range(0.0..extent), r.gen_range(0.0..extent)]
        };
        let radius = r.gen_range(0.2..0.5);
        let v = g.add_vertex(format!("island{i}"), 4)?;
        g.add_vertex_constraint(v, ConicSet::ball(&center, radius)?.remap(4, &[0, 1])?)?;
        // 0 ≤ b_arrive ≤ b_leave ≤ 1
        let rows = vec![unit(4, 2, 1.0), unit(4, 3, -1.0), {
            let mut row = unit(4, 3, 1.0);
            row[2] = -1.0;
            row
        }];
        g.add_vertex_constraint(
            v,
            rows_set(4, rows, vec![0.0, 1.0, 0.0], vec![Cone::nonnegative(3)])?,
        )?;
        if i == 0 {
            g.add_vertex_constraint(
                v,
                rows_set(4, vec![unit(4, 3, 1.0)], vec![-1.0], vec![Cone::zero(1)])?,
            )?;
        }
        let mut c = vec![0.0; 4];
        c[3] = 1.0 / BETA;
        c[2] = -1.0 / BETA;
        g.add_vertex_cost(v, CostAtom::linear(&c)?)?;
        centers.push(center);
        radii.push(radius);
    }
    let reach = SPEED / ALPHA;
    for i in 0..islands {
        for j in 0..islands {
            if i == j {
                continue;
            }
            let gap = ((centers[i][0] - centers[j][0]).powi(2)
                + (centers[i][1] - centers[j][1]).powi(2))
            .sqrt()
                - radii[i]
                - radii[j];
            if gap > 0.6 * reach {
                continue;
            }
            let e = g.add_edge(VertexId(i), VertexId(j), 0)?;
            // edge variable: (p_i, a_i, l_i, p_j, a_j, l_j)
            let mut drain = vec![0.0; 8];
            drain[3] = 1.0 / ALPHA;
            drain[6] = -1.0 / ALPHA;
            let flight: Vec<f64> = drain.iter().map(|v| v * SPEED).collect();
            let rows = vec![
                flight,
                {
                    let mut row = unit(8, 4, 1.0);
                    row[0] = -1.0;
                    row
                },
                {
                    let mut row = unit(8, 5, 1.0);
                    row[1] = -1.0;
                    row
                },
            ];
            g.add_edge_constraint(
                e,
                rows_set(8, rows, vec![0.0; 3], vec![Cone::second_order(3)])?,
            )?;
            g.add_edge_cost(e, CostAtom::linear(&drain)?)?;
        }
    }
    Ok(Instance {
        name: format!("helicopter-{seed}"),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Spp {
            source: VertexId(0),
            target: VertexId(islands - 1),
        }),
    })
}

/// A school bus touring pickup regions: each kid walks at most 3 in the L1
/// metric and pays the walked distance, the bus pays L1 travel.
pub fn school_bus(seed: u64, kids: usize) -> Result<Instance> {
    if kids < 2 {
        return Err(GcsError::InvalidProblem("need at least two kids".into()));
    }
    let mut r = rng(seed);
    let extent = 4.0 * (kids as f64).sqrt() + 4.0;
    let mut g = GcsGraph::new(false);
    let school = g.add_vertex("school", 2)?;
    g.add_vertex_constraint(school, ConicSet::point(&[extent / 2.0, extent / 2.0])?)?;
    let mut vs = vec![school];
    for i in 0..kids {
        let home = [
            r.gen_range(0.0..extent).round(),
            r.gen_range(0.0..extent).round(),
        ];
        let v = g.add_vertex(format!("kid{i}"), 2)?;
        let a = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let b: Vec<f64> = a
            .iter()
            .map(|row| 3.0 + row[0] * home[0] + row[1] * home[1])
            .collect();
        g.add_vertex_constraint(v, ConicSet::halfspaces(&a, &b)?)?;
        let walk = CostAtom::new(
            AtomKind::L1,
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![-home[0], -home[1]]),
            r.gen_range(0.5..1.5),
        )?;
        g.add_vertex_cost(v, walk)?;
        vs.push(v);
    }
    for (k, &a) in vs.iter().enumerate() {
        for &b in &vs[k + 1..] {
            let e = g.add_edge(a, b, 0)?;
            g.add_edge_cost(e, CostAtom::of_difference(AtomKind::L1, 2, 0)?)?;
        }
    }
    Ok(Instance {
        name: format!("school-bus-{seed}"),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Tsp),
    })
}

/// Rooms on a grid joined by doors. A camera placed in a room costs its
/// weighted L∞ distance from the room center; along a door the next camera
/// sits on the shared wall. Room `(0, 0)` is the root.
pub fn camera(seed: u64, rows: usize, cols: usize) -> Result<Instance> {
    if rows * cols < 2 {
        return Err(GcsError::InvalidProblem("need at least two rooms".into()));
    }
    let mut r = rng(seed);
    let mut g = GcsGraph::new(true);
    let mut rooms = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let (lo, hi) = ([j as f64, i as f64], [j as f64 + 1.0, i as f64 + 1.0]);
            let v = g.add_vertex(format!("room{i}_{j}"), 2)?;
            let set = ConicSet::axis_box(&lo, &hi)?;
            g.add_vertex_constraint(v, set.clone())?;
            let atom = CostAtom::new(
                AtomKind::Linf,
                DMatrix::identity(2, 2),
                DVector::from_vec(vec![-(j as f64 + 0.5), -(i as f64 + 0.5)]),
                r.gen_range(0.5..2.0),
            )?;
            g.add_vertex_cost(v, atom)?;
            rooms.push(set);
        }
    }
    let idx = |i: usize, j: usize| i * cols + j;
    // random spanning tree of the grid plus some extra doors
    let mut doors = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if i + 1 < rows {
                doors.push((idx(i, j), idx(i + 1, j)));
            }
            if j + 1 < cols {
                doors.push((idx(i, j), idx(i, j + 1)));
            }
        }
    }
    doors.shuffle(&mut r);
    let mut parent: Vec<usize> = (0..rows * cols).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut open = Vec::new();
    for &(a, b) in &doors {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            open.push((a, b));
        } else if r.gen_bool(0.3) {
            open.push((a, b));
        }
    }
    open.sort();
    for (a, b) in open {
        for (t, h) in [(a, b), (b, a)] {
            let e = g.add_edge(VertexId(t), VertexId(h), 0)?;
            g.add_edge_constraint(e, rooms[t].remap(4, &[2, 3])?)?;
        }
    }
    Ok(Instance {
        name: format!("camera-{seed}"),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Msap { root: VertexId(0) }),
    })
}

/// Covering triangles with disks of area cost. A facility holds
/// `(center, radius)` with the radius at least `r_min` and unbounded above;
/// clients are placeholders in `R¹` fixed at zero. An assignment edge forces
/// the triangle inside the disk.
pub fn circle_cover(seed: u64, facilities: usize, triangles: usize) -> Result<Instance> {
    const R_MIN: f64 = 0.1;
    if facilities == 0 || triangles == 0 {
        return Err(GcsError::InvalidProblem(
            "need facilities and triangles".into(),
        ));
    }
    let mut r = rng(seed);
    let extent = 3.0 * (triangles as f64).sqrt() + 2.0;
    let mut g = GcsGraph::new(false);
    let mut fs = Vec::new();
    for i in 0..facilities {
        let v = g.add_vertex(format!("disk{i}"), 3)?;
        g.add_vertex_constraint(
            v,
            ConicSet::axis_box(&[0.0, 0.0], &[extent, extent])?.remap(3, &[0, 1])?,
        )?;
        g.add_vertex_constraint(
            v,
            rows_set(
                3,
                vec![unit(3, 2, 1.0)],
                vec![-R_MIN],
                vec![Cone::nonnegative(1)],
            )?,
        )?;
        let area = CostAtom::new(
            AtomKind::SquaredL2,
            DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]),
            DVector::zeros(1),
            PI,
        )?;
        g.add_vertex_cost(v, area)?;
        fs.push(v);
    }
    let mut cs = Vec::new();
    let mut shapes = Vec::new();
    for i in 0..triangles {
        let v = g.add_vertex(format!("triangle{i}"), 1)?;
        g.add_vertex_constraint(v, ConicSet::point(&[0.0])?)?;
        let base = [
            r.gen_range(0.5..extent - 0.5),
            r.gen_range(0.5..extent - 0.5),
        ];
        let tri: Vec<[f64; 2]> = (0..3)
            .map(|_| {
                [
                    base[0] + r.gen_range(-0.5..0.5),
                    base[1] + r.gen_range(-0.5..0.5),
                ]
            })
            .collect();
        shapes.push(tri);
        cs.push(v);
    }
    for &f in &fs {
        for (k, &c) in cs.iter().enumerate() {
            let e = g.add_edge(f, c, 0)?;
            // (cx, cy, r, 0): ‖c − p‖ ≤ r for each corner p
            let mut set = ConicSet::whole_space(4);
            for p in &shapes[k] {
                let rows = vec![unit(4, 2, 1.0), unit(4, 0, 1.0), unit(4, 1, 1.0)];
                set = set.intersect(&rows_set(
                    4,
                    rows,
                    vec![0.0, -p[0], -p[1]],
                    vec![Cone::second_order(3)],
                )?)?;
            }
            g.add_edge_constraint(e, set)?;
        }
    }
    Ok(Instance {
        name: format!("circle-cover-{seed}"),
        graph: g,
        spec: ProblemSpec::new(ProblemKind::Flp {
            facilities: fs,
            clients: cs,
        }),
    })
}

/// Induced sub-instance on a vertex subset, with roles restricted to it.
/// Returns `None` if the problem roles do not survive the restriction.
pub fn shard(instance: &Instance, keep: &[VertexId]) -> Option<Instance> {
    let mut g = GcsGraph::new(instance.graph.is_directed());
    let mut map = vec![None; instance.graph.num_vertices()];
    for &v in keep {
        let old = instance.graph.vertex(v);
        let nv = g.add_vertex(old.name.clone(), old.dim).ok()?;
        for c in &old.constraints {
            g.add_vertex_constraint(nv, c.clone()).ok()?;
        }
        for a in &old.costs {
            g.add_vertex_cost(nv, a.clone()).ok()?;
        }
        map[v.0] = Some(nv);
    }
    for (_, edge) in instance.graph.edges() {
        if let (Some(t), Some(h)) = (map[edge.tail.0], map[edge.head.0]) {
            let e = g.add_edge(t, h, edge.aux_dim).ok()?;
            for c in &edge.constraints {
                g.add_edge_constraint(e, c.clone()).ok()?;
            }
            for a in &edge.costs {
                g.add_edge_cost(e, a.clone()).ok()?;
            }
        }
    }
    let remap = |vs: &[VertexId]| -> Vec<VertexId> { vs.iter().filter_map(|v| map[v.0]).collect() };
    let kind = match &instance.spec.kind {
        ProblemKind::Spp { source, target } => ProblemKind::Spp {
            source: map[source.0]?,
            target: map[target.0]?,
        },
        ProblemKind::Msap { root } => ProblemKind::Msap { root: map[root.0]? },
        ProblemKind::Flp {
            facilities,
            clients,
        } => ProblemKind::Flp {
            facilities: remap(facilities),
            clients: remap(clients),
        },
        ProblemKind::Bmp {
            facilities,
            clients,
        } => ProblemKind::Bmp {
            facilities: remap(facilities),
            clients: remap(clients),
        },
        ProblemKind::Custom(_) => return None,
        other => other.clone(),
    };
    Some(Instance {
        name: format!("{}-shard", instance.name),
        graph: g,
        spec: ProblemSpec::new(kind),
    })
}
