//! Network descriptions and the graph structure matrices.
//!
//! A network has `n` vertices and `m` directed edges (parallel edges and self-loops are
//! allowed). Every edge `e_k` leaving `v_j` carries an outgoing weight `w_out`, and the
//! outgoing weights of each vertex sum to one. Edges also carry an incoming weight
//! `w_in` used by the dynamic vertex conditions.
//!
//! From that data we build
//!
//! * `psi`        (m x n): `psi[k][j] = w_out(e_k)` if `e_k` leaves `v_j`,
//! * `phi_minus`  (n x m): `phi_minus[j][k] = 1` if `e_k` leaves `v_j`,
//! * `phi_plus_w` (n x m): `phi_plus_w[i][k] = w_in(e_k)` if `e_k` enters `v_i`,
//! * `a` (n x n) and `b` (m x m): the transposed weighted adjacency matrices of the
//!   graph and of its line graph.
//!
//! In static mode `a[i][j]` sums `w_out(e_k)` over edges `v_j -> v_i`, and `b[i][j]`
//! is `w_out(e_i)` whenever `e_j` ends where `e_i` starts. In dynamic mode
//! `a = phi_plus_w * psi` and `b = psi * phi_plus_w`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on the outgoing-weight sums of a vertex.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    /// Index of the vertex the edge leaves (0-based).
    pub tail: usize,
    /// Index of the vertex the edge enters (0-based).
    pub head: usize,
    pub w_out: f64,
    pub w_in: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Static,
    Dynamic,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    pub phi_minus: DMatrix<f64>,
    pub phi_plus_w: DMatrix<f64>,
    pub mode: Mode,
}

impl GraphMatrices {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    /// `psi * e_i`, the edge vector of a control acting in vertex `i`.
    pub fn control_direction(&self, vertex: usize) -> Result<DVector<f64>> {
        if vertex >= self.n() {
            return Err(Error::InvalidVertex { index: vertex + 1, n: self.n() });
        }
        Ok(self.psi.column(vertex).into_owned())
    }
}

impl NetworkSpec {
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Checks index ranges, weight ranges, and the stochasticity of `psi`.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidNetwork("network has no vertices".into()));
        }
        if self.edges.is_empty() {
            return Err(Error::InvalidNetwork("network has no edges".into()));
        }
        let mut ids = HashSet::new();
        for e in &self.edges {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidNetwork(format!("duplicate edge id `{}`", e.id)));
            }
            for v in [e.tail, e.head] {
                if v >= self.n {
                    return Err(Error::InvalidVertex { index: v + 1, n: self.n });
                }
            }
            for w in [e.w_out, e.w_in] {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidNetwork(format!(
                        "weight {w} of edge `{}` outside [0, 1]",
                        e.id
                    )));
                }
            }
        }
        let mut sums = vec![0.0; self.n];
        let mut out_degree = vec![0usize; self.n];
        for e in &self.edges {
            sums[e.tail] += e.w_out;
            out_degree[e.tail] += 1;
        }
        for v in 0..self.n {
            if out_degree[v] == 0 {
                return Err(Error::NoOutgoingEdge { vertex: v + 1 });
            }
            if (sums[v] - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic { vertex: v + 1, sum: sums[v] });
            }
        }
        Ok(())
    }
}

/// Builds the five structure matrices.
pub fn build_matrices(spec: &NetworkSpec, mode: Mode) -> Result<GraphMatrices> {
    spec.validate()?;
    let (n, m) = (spec.n, spec.m());
    let mut psi = DMatrix::zeros(m, n);
    let mut phi_minus = DMatrix::zeros(n, m);
    let mut phi_plus_w = DMatrix::zeros(n, m);
    for (k, e) in spec.edges.iter().enumerate() {
        psi[(k, e.tail)] = e.w_out;
        phi_minus[(e.tail, k)] = 1.0;
        phi_plus_w[(e.head, k)] = e.w_in;
    }
    let (a, b) = match mode {
        Mode::Static => {
            let mut a = DMatrix::zeros(n, n);
            for e in &spec.edges {
                a[(e.head, e.tail)] += e.w_out;
            }
            let mut b = DMatrix::zeros(m, m);
            for (j, ej) in spec.edges.iter().enumerate() {
                for (i, ei) in spec.edges.iter().enumerate() {
                    if ej.head == ei.tail {
                        b[(i, j)] = ei.w_out;
                    }
                }
            }
            (a, b)
        }
        Mode::Dynamic => (&phi_plus_w * &psi, &psi * &phi_plus_w),
    };
    Ok(GraphMatrices { a, b, psi, phi_minus, phi_plus_w, mode })
}

/// Residuals of the structural identities between the graph matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    /// max |psi a - b psi|
    pub intertwining: f64,
    /// max |phi_minus psi - id|
    pub left_inverse: f64,
    /// max |psi R(l, a) - R(l, b) psi|, `None` when skipped.
    pub resolvent: Option<f64>,
    pub resolvent_lambda: f64,
    pub notice: Option<String>,
    /// max |column sum of psi - 1|
    pub column_sums: f64,
    pub min_entry: f64,
    /// max of |a - phi_plus_w psi| and |b - psi phi_plus_w| in dynamic mode.
    pub dynamic_definition: Option<f64>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        [self.intertwining, self.left_inverse, self.resolvent.unwrap_or(0.0), self.column_sums]
            .into_iter()
            .chain(self.dynamic_definition)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.min_entry >= 0.0
    }
}

pub fn validate_relations(mats: &GraphMatrices, tol: f64) -> RelationReport {
    let n = mats.n();
    let intertwining = linalg::max_abs(&(&mats.psi * &mats.a - &mats.b * &mats.psi));
    let left_inverse =
        linalg::max_abs(&(&mats.phi_minus * &mats.psi - DMatrix::<f64>::identity(n, n)));
    let column_sums = (0..n)
        .map(|j| (mats.psi.column(j).sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let min_entry = [&mats.a, &mats.b, &mats.psi, &mats.phi_minus, &mats.phi_plus_w]
        .iter()
        .flat_map(|x| x.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let lambda = linalg::spectral_radius(&mats.a) + 1.0;
    let gap = tol.max(linalg::SPECTRUM_GAP);
    let mut notice = None;
    let resolvent = if linalg::spectrum_distance(lambda, &mats.a) <= gap
        || linalg::spectrum_distance(lambda, &mats.b) <= gap
    {
        notice = Some(format!("lambda = {lambda} is an eigenvalue; resolvent check skipped"));
        None
    } else {
        match (linalg::resolvent(lambda, &mats.a), linalg::resolvent(lambda, &mats.b)) {
            (Ok(ra), Ok(rb)) => Some(linalg::max_abs(&(&mats.psi * ra - rb * &mats.psi))),
            (Err(e), _) | (_, Err(e)) => {
                notice = Some(format!("resolvent check skipped: {e}"));
                None
            }
        }
    };

    let dynamic_definition = (mats.mode == Mode::Dynamic).then(|| {
        let da = linalg::max_abs(&(&mats.a - &mats.phi_plus_w * &mats.psi));
        let db = linalg::max_abs(&(&mats.b - &mats.psi * &mats.phi_plus_w));
        da.max(db)
    });

    RelationReport {
        intertwining,
        left_inverse,
        resolvent,
        resolvent_lambda: lambda,
        notice,
        column_sums,
        min_entry,
        dynamic_definition,
    }
}

fn parse_weight(tok: &str, line: usize) -> Result<f64> {
    let w: f64 = tok
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("invalid weight `{tok}`") })?;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Parse { line, msg: format!("weight {w} outside [0, 1]") });
    }
    Ok(w)
}

fn parse_vertex(tok: &str, line: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("invalid vertex `{tok}`") })?;
    if v == 0 {
        return Err(Error::Parse { line, msg: "vertices are numbered from 1".into() });
    }
    Ok(v - 1)
}

/// Parses the network text format:
///
/// ```text
/// # comment
/// vertices: 2
/// edge: e1 1 2 1.0
/// edge: e2 2 1 1.0 0.5
/// ```
///
/// Vertices are 1-based; `w_in` defaults to `w_out`. The result is validated.
pub fn parse_network(text: &str) -> Result<NetworkSpec> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut ids = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| Error::Parse { line, msg: format!("expected `key: value`, got `{content}`") })?;
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match key.trim() {
            "vertices" => {
                if n.is_some() {
                    return Err(Error::Parse { line, msg: "duplicate `vertices`".into() });
                }
                if toks.len() != 1 {
                    return Err(Error::Parse { line, msg: "expected `vertices: <n>`".into() });
                }
                let v: usize = toks[0]
                    .parse()
                    .map_err(|_| Error::Parse { line, msg: format!("invalid vertex count `{}`", toks[0]) })?;
                if v == 0 {
                    return Err(Error::Parse { line, msg: "vertex count must be positive".into() });
                }
                n = Some(v);
            }
            "edge" => {
                if !(toks.len() == 4 || toks.len() == 5) {
                    return Err(Error::Parse {
                        line,
                        msg: "expected `edge: <id> <tail> <head> <w_out> [w_in]`".into(),
                    });
                }
                let id = toks[0].to_string();
                if !ids.insert(id.clone()) {
                    return Err(Error::Parse { line, msg: format!("duplicate edge id `{id}`") });
                }
                let tail = parse_vertex(toks[1], line)?;
                let head = parse_vertex(toks[2], line)?;
                let w_out = parse_weight(toks[3], line)?;
                let w_in = match toks.get(4) {
                    Some(t) => parse_weight(t, line)?,
                    None => w_out,
                };
                if let Some(nv) = n {
                    for v in [tail, head] {
                        if v >= nv {
                            return Err(Error::Parse {
                                line,
                                msg: format!("vertex {} exceeds vertex count {nv}", v + 1),
                            });
                        }
                    }
                }
                edges.push(Edge { id, tail, head, w_out, w_in });
            }
            other => return Err(Error::Parse { line, msg: format!("unknown key `{other}`") }),
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: "missing `vertices`".into() })?;
    let spec = NetworkSpec { n, edges };
    spec.validate()?;
    Ok(spec)
}

pub fn serialize_network(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    writeln!(out, "vertices: {}", spec.n).unwrap();
    for e in &spec.edges {
        write!(out, "edge: {} {} {} {:?}", e.id, e.tail + 1, e.head + 1, e.w_out).unwrap();
        if e.w_in != e.w_out {
            write!(out, " {:?}", e.w_in).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Random network with `n` vertices and `m >= n` edges; every vertex gets at least one
/// outgoing edge and random stochastic outgoing weights.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, m: usize) -> NetworkSpec {
    assert!(n >= 1 && m >= n, "need m >= n >= 1");
    let mut tails: Vec<usize> = (0..n).collect();
    tails.extend((n..m).map(|_| rng.random_range(0..n)));
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut sums = vec![0.0; n];
    for (k, &t) in tails.iter().enumerate() {
        sums[t] += raw[k];
    }
    let edges = tails
        .iter()
        .enumerate()
        .map(|(k, &tail)| Edge {
            id: format!("e{}", k + 1),
            tail,
            head: rng.random_range(0..n),
            w_out: raw[k] / sums[tail],
            w_in: rng.random_range(0.0..=1.0),
        })
        .collect();
    NetworkSpec { n, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TWO_CYCLE: &str = "vertices: 2\nedge: e1 1 2 1\nedge: e2 2 1 1\n";

    fn m(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn two_cycle_matrices() {
        let spec = parse_network(TWO_CYCLE).unwrap();
        assert_eq!((spec.n, spec.m()), (2, 2));
        for mode in [Mode::Static, Mode::Dynamic] {
            let g = build_matrices(&spec, mode).unwrap();
            let swap = m(2, 2, &[0.0, 1.0, 1.0, 0.0]);
            assert_eq!(g.psi, DMatrix::identity(2, 2));
            assert_eq!(g.phi_minus, DMatrix::identity(2, 2));
            assert_eq!(g.phi_plus_w, swap);
            assert_eq!(g.a, swap);
            assert_eq!(g.b, swap);
            let rep = validate_relations(&g, 1e-12);
            assert_eq!(rep.max_residual(), 0.0);
            assert!(rep.passes(1e-12));
        }
    }

    #[test]
    fn self_loop_is_identity() {
        let spec = parse_network("vertices: 1\nedge: a 1 1 1\n").unwrap();
        let g = build_matrices(&spec, Mode::Static).unwrap();
        let one = DMatrix::identity(1, 1);
        for x in [&g.a, &g.b, &g.psi, &g.phi_minus, &g.phi_plus_w] {
            assert_eq!(x, &one);
        }
    }

    #[test]
    fn perturbed_psi_is_reported() {
        let spec = parse_network(TWO_CYCLE).unwrap();
        let mut g = build_matrices(&spec, Mode::Static).unwrap();
        g.psi[(0, 1)] += 1e-3;
        let rep = validate_relations(&g, 1e-12);
        assert!((rep.intertwining - 1e-3).abs() < 1e-15);
        assert!(!rep.passes(1e-12));
    }

    #[test]
    fn weights_summing_to_one_are_accepted() {
        let text = "vertices: 2\nedge: a 1 2 0.3\nedge: b 1 1 0.7\nedge: c 2 1 1\n";
        let spec = parse_network(text).unwrap();
        let g = build_matrices(&spec, Mode::Static).unwrap();
        assert!(validate_relations(&g, 1e-12).passes(1e-12));
    }

    #[test]
    fn non_stochastic_vertex_is_named() {
        let text = "vertices: 2\nedge: a 1 2 0.3\nedge: b 1 1 0.6\nedge: c 2 1 1\n";
        assert!(matches!(parse_network(text), Err(Error::NotStochastic { vertex: 1, .. })));
    }

    #[test]
    fn missing_outgoing_edge() {
        let text = "vertices: 2\nedge: a 1 2 1\n";
        assert_eq!(parse_network(text), Err(Error::NoOutgoingEdge { vertex: 2 }));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let dup = "vertices: 2\nedge: a 1 2 1\nedge: a 2 1 1\n";
        assert!(matches!(parse_network(dup), Err(Error::Parse { line: 3, .. })));
        let bad_w = "# header\nvertices: 1\nedge: a 1 1 1.5\n";
        assert!(matches!(parse_network(bad_w), Err(Error::Parse { line: 3, .. })));
        let junk = "vertices 2\n";
        assert!(matches!(parse_network(junk), Err(Error::Parse { line: 1, .. })));
        let oob = "vertices: 1\nedge: a 1 2 1\n";
        assert!(matches!(parse_network(oob), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn incoming_weight_defaults_to_outgoing() {
        let spec = parse_network("vertices: 2\nedge: a 1 2 1 0.25 # in\nedge: b 2 1 1\n").unwrap();
        assert_eq!(spec.edges[0].w_in, 0.25);
        assert_eq!(spec.edges[1].w_in, 1.0);
    }

    #[test]
    fn dynamic_mode_uses_incoming_weights() {
        let spec = parse_network("vertices: 2\nedge: a 1 2 1 0.5\nedge: b 2 1 1\n").unwrap();
        let g = build_matrices(&spec, Mode::Dynamic).unwrap();
        assert_eq!(g.a, m(2, 2, &[0.0, 1.0, 0.5, 0.0]));
        let rep = validate_relations(&g, 1e-12);
        assert_eq!(rep.dynamic_definition, Some(0.0));
        assert!(rep.passes(1e-12));
    }

    #[test]
    fn random_networks_satisfy_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(n..=16);
            let spec = random_network(&mut rng, n, m);
            for mode in [Mode::Static, Mode::Dynamic] {
                let g = build_matrices(&spec, mode).unwrap();
                let rep = validate_relations(&g, 1e-12);
                assert!(rep.passes(1e-12), "{rep:?}");
            }
        }
    }

    #[test]
    fn serialize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let spec = random_network(&mut rng, 4, 7);
            let back = parse_network(&serialize_network(&spec)).unwrap();
            assert_eq!(back, spec);
        }
    }
}
