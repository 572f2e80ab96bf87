//! Unary clock extended by an idling chain: `C` extra unary qubits and `C`
//! idling qubits under them.
//!
//! Qubit layout: unary `c_1..c_{N+1}`, then extra `e_1..e_C` (continuing the
//! unary row), then idling `i_1..i_C`. Labels read `d|e|i`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::linalg::{dense_eigenvalues, lanczos_lowest, Csr};
use crate::spin::{build_full, LabeledSparseOperator, Term};

/// Largest legal graph handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdlingSpec {
    pub n: usize,
    pub c: usize,
}

impl IdlingSpec {
    pub fn new(n: usize, c: usize) -> Result<Self> {
        if n < 1 || c < 1 {
            return domain(format!(
                "idling chain needs N >= 1 and C >= 1, got N={n}, C={c}"
            ));
        }
        if c > 40 {
            return Err(Error::Size {
                dim: usize::MAX,
                cap: crate::error::max_dim(),
            });
        }
        Ok(Self { n, c })
    }

    /// `A = 2^(C+1) - 2` states past the end of the unary clock.
    pub fn a(&self) -> u64 {
        (1u64 << (self.c + 1)) - 2
    }

    pub fn z(&self) -> f64 {
        (self.a() + 1) as f64 / self.n as f64
    }

    pub fn num_states(&self) -> u64 {
        self.n as u64 + 1 + self.a()
    }

    pub fn qubits(&self) -> usize {
        self.n + 1 + 2 * self.c
    }

    fn extra(&self, j: usize) -> usize {
        self.n + j
    }

    fn idle(&self, j: usize) -> usize {
        self.n + self.c + j
    }
}

/// Smallest `C` with done-overlap at least 1/2, i.e. `A + 1 >= N`.
pub fn extra_for_half(n: usize) -> usize {
    let mut c = 1;
    while ((1u64 << (c + 1)) - 1) < n as u64 {
        c += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Unary,
    Extra,
    Idling,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Unary => "unary",
            EdgeKind::Extra => "extra",
            EdgeKind::Idling => "idling",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LegalGraph {
    pub spec: IdlingSpec,
    /// Bit strings in lexicographic order.
    pub states: Vec<Vec<u8>>,
    /// `(u, v, kind)` with `u < v`.
    pub edges: Vec<(usize, usize, EdgeKind)>,
    index: HashMap<Vec<u8>, usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl LegalGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, bits: &[u8]) -> Option<usize> {
        self.index.get(bits).copied()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn label(&self, i: usize) -> String {
        let s = &self.states[i];
        let n = self.spec.n;
        let c = self.spec.c;
        let part = |r: std::ops::Range<usize>| {
            s[r].iter()
                .map(|b| char::from(b'0' + b))
                .collect::<String>()
        };
        format!(
            "{}|{}|{}",
            part(0..n + 1),
            part(n + 1..n + 1 + c),
            part(n + 1 + c..n + 1 + 2 * c)
        )
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.len()];
        for &(u, v, _) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// `H|legal`: degree on the diagonal, `-1` per edge.
    pub fn hamiltonian(&self) -> LabeledSparseOperator {
        let mut trip: Vec<(usize, usize, f64)> = self
            .degrees()
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, i, d as f64))
            .collect();
        for &(u, v, _) in &self.edges {
            trip.push((u, v, -1.0));
            trip.push((v, u, -1.0));
        }
        LabeledSparseOperator {
            dim: self.len(),
            labels: crate::spin::Labels::Explicit((0..self.len()).map(|i| self.label(i)).collect()),
            csr: Csr::from_triplets(self.len(), trip),
        }
    }

    /// One line per edge: `label_u label_v kind`.
    pub fn edge_list(&self) -> String {
        self.edges
            .iter()
            .map(|&(u, v, k)| format!("{} {} {}\n", self.label(u), self.label(v), k.name()))
            .collect()
    }
}

/// Builds the legal states and their transitions directly.
pub fn enumerate_legal_states(spec: &IdlingSpec) -> Result<LegalGraph> {
    let m = spec.num_states();
    if m > 1_000_000 {
        return Err(Error::Size {
            dim: m as usize,
            cap: 1_000_000,
        });
    }
    let (n, c) = (spec.n, spec.c);
    let q = spec.qubits();
    let mut states = Vec::with_capacity(m as usize);
    for k in 1..=n + 1 {
        let mut s = vec![0u8; q];
        s[..k].iter_mut().for_each(|b| *b = 1);
        states.push(s);
    }
    for on in 1..=c {
        for pattern in 0..(1usize << on) {
            let mut s = vec![0u8; q];
            s[..n + 1 + on].iter_mut().for_each(|b| *b = 1);
            for j in 0..on {
                s[spec.idle(j + 1)] = ((pattern >> (on - 1 - j)) & 1) as u8;
            }
            states.push(s);
        }
    }
    states.sort();
    let index: HashMap<Vec<u8>, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    let mut edges = Vec::new();
    for (u, s) in states.iter().enumerate() {
        // Only list moves that turn a bit on, so each edge shows up once.
        let ones = s[..n + 1 + c].iter().take_while(|&&b| b == 1).count();
        let mut push = |bit: usize, kind: EdgeKind| {
            let mut t = s.clone();
            t[bit] = 1;
            let v = index[&t];
            edges.push((u.min(v), u.max(v), kind));
        };
        if ones <= n {
            push(ones, EdgeKind::Unary);
        } else if ones < n + 1 + c && s[spec.idle(ones - n)] == 0 {
            push(ones, EdgeKind::Extra);
        }
        for j in 1..=c {
            if s[spec.extra(j)] == 1 && s[spec.idle(j)] == 0 {
                push(spec.idle(j), EdgeKind::Idling);
            }
        }
    }
    edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
    let edge_index = edges
        .iter()
        .enumerate()
        .map(|(k, &(u, v, _))| ((u, v), k))
        .collect();
    Ok(LegalGraph {
        spec: *spec,
        states,
        edges,
        index,
        edge_index,
    })
}

/// The four term groups as local operators on `N + 1 + 2C` qubits.
pub fn idling_terms(spec: &IdlingSpec) -> Vec<Term> {
    let (n, c) = (spec.n, spec.c);
    let top = n + 1 + c;
    let mut terms = vec![Term::projector(1.0, vec![0], &[0])];
    for k in 0..top - 1 {
        terms.push(Term::projector(1.0, vec![k, k + 1], &[0, 1]));
    }
    for j in 1..=c {
        terms.push(Term::projector(
            1.0,
            vec![spec.extra(j), spec.idle(j)],
            &[0, 1],
        ));
    }
    // Unary moves flip c_2 .. c_{N+1}.
    for j in 0..n {
        terms.push(Term::transition(
            1.0,
            vec![j, j + 1, j + 2],
            &[1, 0, 0],
            &[1, 1, 0],
        ));
    }
    // Extra moves flip e_j while i_j is off.
    for j in 1..c {
        let e = spec.extra(j);
        terms.push(Term::transition(
            1.0,
            vec![e - 1, e, e + 1, spec.idle(j)],
            &[1, 0, 0, 0],
            &[1, 1, 0, 0],
        ));
    }
    let e = spec.extra(c);
    terms.push(Term::transition(
        1.0,
        vec![e - 1, e, spec.idle(c)],
        &[1, 0, 0],
        &[1, 1, 0],
    ));
    for j in 1..=c {
        terms.push(Term::transition(
            1.0,
            vec![spec.extra(j), spec.idle(j)],
            &[1, 0],
            &[1, 1],
        ));
    }
    terms
}

/// Full `2^(N+1+2C)`-dimensional operator, capped at 20 qubits.
pub fn full_space_hamiltonian(spec: &IdlingSpec) -> Result<LabeledSparseOperator> {
    if spec.qubits() > 20 {
        return Err(Error::Size {
            dim: 1usize << spec.qubits().min(62),
            cap: 1 << 20,
        });
    }
    build_full(2, spec.qubits(), &idling_terms(spec))
}

/// `(1 + A) / (N + 1 + A)` in lowest terms.
pub fn done_overlap(spec: &IdlingSpec) -> (u64, u64) {
    let num = spec.a() + 1;
    let den = spec.num_states();
    let g = gcd(num, den);
    (num / g, den / g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `P = I - H|legal / (2 (C + 1))`.
pub fn stochastic_matrix(graph: &LegalGraph) -> Result<DMatrix<f64>> {
    check_dim(graph.len() * graph.len())?;
    let h = graph.hamiltonian().to_dense();
    let m = graph.len();
    Ok(DMatrix::identity(m, m) - h / (2.0 * (graph.spec.c + 1) as f64))
}

/// Vertex sequence of the canonical path from `s` to `t`.
pub fn canonical_path(graph: &LegalGraph, s: usize, t: usize) -> Result<Vec<usize>> {
    if s >= graph.len() || t >= graph.len() {
        return Err(Error::Index(format!(
            "path {s} -> {t} in a graph of {}",
            graph.len()
        )));
    }
    if s > t {
        let mut p = canonical_path(graph, t, s)?;
        p.reverse();
        return Ok(p);
    }
    let spec = graph.spec;
    let (n, c) = (spec.n, spec.c);
    let mut cur = graph.states[s].clone();
    let target = &graph.states[t];
    let mut path = vec![s];
    let step = |cur: &mut Vec<u8>, bit: usize, value: u8, path: &mut Vec<usize>| -> Result<()> {
        cur[bit] = value;
        let v = graph.index_of(cur).ok_or_else(|| {
            Error::PathInvalid(format!(
                "{s} -> {t}: step {} leaves the legal states",
                path.len()
            ))
        })?;
        let u = *path.last().unwrap();
        if graph.edge_between(u, v).is_none() {
            return Err(Error::PathInvalid(format!(
                "{s} -> {t}: step {} is not an edge",
                path.len()
            )));
        }
        path.push(v);
        Ok(())
    };
    // Unary stretch, up to all of c_1..c_{N+1} if the target is past it.
    let unary_goal = target[..=n].iter().filter(|&&b| b == 1).count();
    let mut ones = cur[..=n].iter().filter(|&&b| b == 1).count();
    while ones < unary_goal {
        step(&mut cur, ones, 1, &mut path)?;
        ones += 1;
    }
    // Idling part, left to right.
    for k in 1..=c {
        let (e, i) = (spec.extra(k), spec.idle(k));
        if cur[e] != target[e] {
            step(&mut cur, e, target[e], &mut path)?;
        }
        if cur[i] != target[i] {
            step(&mut cur, i, target[i], &mut path)?;
        }
    }
    if cur != *target {
        return Err(Error::PathInvalid(format!(
            "{s} -> {t}: ended at {}",
            graph.index_of(&cur).map_or(-1, |x| x as i64)
        )));
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPathReport {
    /// Longest path, in edges.
    pub max_path_length: usize,
    /// Largest number of ordered pairs whose path uses one edge.
    pub max_edge_load: u64,
    pub congestion: f64,
    /// `1 / (rho l)` for the Markov chain.
    pub chain_gap_bound: f64,
    /// `2 (C + 1) / (rho l)` for `H|legal`.
    pub gap_lower_bound: f64,
    /// Per-edge loads aligned with `LegalGraph::edges`.
    pub loads: Vec<u64>,
}

/// Builds every canonical path and tallies the exact edge loads.
pub fn canonical_paths(graph: &LegalGraph) -> Result<CanonicalPathReport> {
    let m = graph.len();
    if (m as u64) * (m as u64) > 100_000_000 {
        return Err(Error::Size {
            dim: m * m,
            cap: 100_000_000,
        });
    }
    let (loads, longest) = (0..m)
        .into_par_iter()
        .map(|s| -> Result<(Vec<u64>, usize)> {
            let mut loads = vec![0u64; graph.edges.len()];
            let mut longest = 0;
            for t in s + 1..m {
                let p = canonical_path(graph, s, t)?;
                longest = longest.max(p.len() - 1);
                for w in p.windows(2) {
                    // The reverse path uses the same edges.
                    loads[graph.edge_between(w[0], w[1]).unwrap()] += 2;
                }
            }
            Ok((loads, longest))
        })
        .try_reduce(
            || (vec![0u64; graph.edges.len()], 0),
            |(mut a, la), (b, lb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok((a, la.max(lb)))
            },
        )?;
    let max_edge_load = loads.iter().copied().max().unwrap_or(0);
    let scale = 2.0 * (graph.spec.c + 1) as f64;
    // rho = max load * pi^2 / (pi * P_ab) with pi = 1/M and P_ab = 1/scale.
    let congestion = max_edge_load as f64 * scale / m as f64;
    let l = longest.max(1) as f64;
    let chain_gap_bound = 1.0 / (congestion * l);
    Ok(CanonicalPathReport {
        max_path_length: longest,
        max_edge_load,
        congestion,
        chain_gap_bound,
        gap_lower_bound: scale * chain_gap_bound,
        loads,
    })
}

/// Load of the unary edge that switches on `c_a`, for `2 <= a <= N + 1`.
pub fn unary_edge_load(spec: &IdlingSpec, a: usize) -> u64 {
    let below = (a - 1) as u64;
    2 * below * (spec.num_states() - below)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub numeric_gap: f64,
    /// `(z + 1) / (8 z N^2)`.
    pub analytic_bound: f64,
    pub ground_energy: f64,
}

/// Two lowest eigenvalues of `H|legal`: dense for small graphs, Lanczos above.
pub fn gap_check(graph: &LegalGraph) -> Result<GapReport> {
    let m = graph.len();
    let h = graph.hamiltonian();
    let (e0, e1) = if m <= DENSE_LIMIT {
        let e = dense_eigenvalues(&h.to_dense())?;
        (e[0], e[1])
    } else {
        let r = lanczos_lowest(|x, y| h.csr.matvec(x, y), m, 2, 1e-10, 17)?;
        (r.values[0], r.values[1])
    };
    let spec = graph.spec;
    let z = spec.z();
    Ok(GapReport {
        numeric_gap: e1 - e0,
        analytic_bound: (z + 1.0) / (8.0 * z * (spec.n * spec.n) as f64),
        ground_energy: e0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdlingReport {
    pub n: usize,
    pub c: usize,
    pub n_states: usize,
    pub overlap_num: u64,
    pub overlap_den: u64,
    pub l: usize,
    pub rho: f64,
    pub bound: f64,
    pub numeric_gap: f64,
}

pub fn report(spec: &IdlingSpec) -> Result<IdlingReport> {
    let g = enumerate_legal_states(spec)?;
    let paths = canonical_paths(&g)?;
    let gap = gap_check(&g)?;
    let (num, den) = done_overlap(spec);
    Ok(IdlingReport {
        n: spec.n,
        c: spec.c,
        n_states: g.len(),
        overlap_num: num,
        overlap_den: den,
        l: paths.max_path_length,
        rho: paths.congestion,
        bound: paths.gap_lower_bound,
        numeric_gap: gap.numeric_gap,
    })
}
