//! Discrete curvature on simplicial complexes.
//!
//! Forman-Ricci curvature of a p-simplex counts cofaces against parallel
//! neighbors; on graph edges with no cofaces it reduces to the classic
//! `4 − deg(u) − deg(v)`. Vertex curvature comes in three modes: the sum of
//! incident edge curvatures (default), their mean, and a combinatorial
//! angle-deficit that satisfies Gauss-Bonnet exactly on pure 2-complexes.
//! All values are exact (integers or small rationals) before any f64 export.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::complex::{Simplex, SimplicialComplex};
use crate::evolution::EvolutionSeries;
use crate::fitting::{self, FitError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurvatureError {
    #[error("simplex {0:?} is not in the complex")]
    MissingSimplex(Vec<u8>),
    #[error("vertex {0} is not in the complex")]
    MissingVertex(u8),
    #[error("order-0 curvature is vertex curvature; use gaussian_vertex")]
    OrderZero,
    #[error("Gauss-Bonnet series needs at least {needed} steps, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("unknown curvature mode `{0}` (expected forman_sum, forman_mean or angle_deficit)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VertexCurvatureMode {
    #[default]
    FormanSum,
    FormanMean,
    AngleDeficit,
}

impl VertexCurvatureMode {
    pub fn name(self) -> &'static str {
        match self {
            VertexCurvatureMode::FormanSum => "forman_sum",
            VertexCurvatureMode::FormanMean => "forman_mean",
            VertexCurvatureMode::AngleDeficit => "angle_deficit",
        }
    }
}

impl std::fmt::Display for VertexCurvatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VertexCurvatureMode {
    type Err = CurvatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forman_sum" => Ok(VertexCurvatureMode::FormanSum),
            "forman_mean" => Ok(VertexCurvatureMode::FormanMean),
            "angle_deficit" => Ok(VertexCurvatureMode::AngleDeficit),
            other => Err(CurvatureError::UnknownMode(other.to_string())),
        }
    }
}

impl Serialize for VertexCurvatureMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Number of shared vertices of two canonical simplices.
fn shared_vertices(a: &Simplex, b: &Simplex) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    let (va, vb) = (a.vertices(), b.vertices());
    while i < va.len() && j < vb.len() {
        match va[i].cmp(&vb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn merged_vertices(a: &Simplex, b: &Simplex) -> Vec<u8> {
    let mut v: Vec<u8> = a.vertices().iter().chain(b.vertices()).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Unweighted Forman curvature of a p-simplex (p ≥ 1):
/// `F(s) = #cofaces(s) + p + 1 − #parallel(s)`, where a parallel neighbor
/// shares a (p−1)-face with `s` but no (p+1)-coface.
pub fn forman_p(c: &SimplicialComplex, s: &Simplex) -> Result<i64, CurvatureError> {
    let p = s.dimension();
    if p == 0 {
        return Err(CurvatureError::OrderZero);
    }
    if !c.contains(s) {
        return Err(CurvatureError::MissingSimplex(s.vertices().to_vec()));
    }
    let cofaces = c.cofaces(s).len() as i64;
    // two distinct p-simplices share a (p-1)-face iff they share exactly p
    // vertices; their only possible common coface is then the simplex on
    // their union
    let parallel = c
        .simplices(p)
        .filter(|t| *t != s && shared_vertices(s, t) == p)
        .filter(|t| {
            Simplex::new(merged_vertices(s, t))
                .map(|u| !c.contains(&u))
                .unwrap_or(true)
        })
        .count() as i64;
    Ok(cofaces + p as i64 + 1 - parallel)
}

/// Forman curvature of an edge. Computed by [`forman_p`]; when the edge has
/// no cofaces this equals `4 − deg(u) − deg(v)` on the 1-skeleton, which is
/// asserted in debug builds.
pub fn forman_edge(c: &SimplicialComplex, e: &Simplex) -> Result<i64, CurvatureError> {
    if e.dimension() != 1 || !c.contains(e) {
        return Err(CurvatureError::MissingSimplex(e.vertices().to_vec()));
    }
    let value = forman_p(c, e)?;
    #[cfg(debug_assertions)]
    if c.cofaces(e).is_empty() {
        let deg_sum: usize = e.vertices().iter().map(|&v| c.degree(v)).sum();
        debug_assert_eq!(value, 4 - deg_sum as i64, "edge formula mismatch for {e:?}");
    }
    Ok(value)
}

/// Vertex curvature in exact rational arithmetic.
pub fn gaussian_vertex_exact(
    c: &SimplicialComplex,
    v: u8,
    mode: VertexCurvatureMode,
) -> Result<Rational64, CurvatureError> {
    let vertex = Simplex::vertex(v);
    if !c.contains(&vertex) {
        return Err(CurvatureError::MissingVertex(v));
    }
    match mode {
        VertexCurvatureMode::FormanSum | VertexCurvatureMode::FormanMean => {
            let incident: Vec<&Simplex> = c
                .simplices(1)
                .filter(|e| e.vertices().contains(&v))
                .collect();
            let mut sum = 0i64;
            for e in &incident {
                sum += forman_p(c, e)?;
            }
            if mode == VertexCurvatureMode::FormanSum {
                Ok(Rational64::from_integer(sum))
            } else if incident.is_empty() {
                Ok(Rational64::zero())
            } else {
                Ok(Rational64::new(sum, incident.len() as i64))
            }
        }
        VertexCurvatureMode::AngleDeficit => {
            let deg = c.degree(v) as i64;
            let triangles = c
                .simplices(2)
                .filter(|t| t.vertices().contains(&v))
                .count() as i64;
            // 1 − deg/2 + #triangles/3 = (6 − 3·deg + 2·#triangles)/6
            Ok(Rational64::new(6 - 3 * deg + 2 * triangles, 6))
        }
    }
}

/// Vertex curvature as a float; see [`gaussian_vertex_exact`].
pub fn gaussian_vertex(
    c: &SimplicialComplex,
    v: u8,
    mode: VertexCurvatureMode,
) -> Result<f64, CurvatureError> {
    Ok(rational_to_f64(gaussian_vertex_exact(c, v, mode)?))
}

/// Σ_v K_v over all vertices, exact.
pub fn total_vertex_curvature_exact(
    c: &SimplicialComplex,
    mode: VertexCurvatureMode,
) -> Result<Rational64, CurvatureError> {
    let mut total = Rational64::zero();
    for v in c.nodes().collect::<Vec<_>>() {
        total += gaussian_vertex_exact(c, v, mode)?;
    }
    Ok(total)
}

fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Min/mean/max of the Forman curvatures at one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub mean: f64,
    pub min: i64,
    pub max: i64,
}

/// Curvature of every simplex of every order, plus vertex curvatures.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub mode: VertexCurvatureMode,
    /// order (≥ 1) → (simplex, Forman curvature), registry order.
    pub per_order: BTreeMap<usize, Vec<(Simplex, i64)>>,
    pub order_summaries: Vec<OrderSummary>,
    /// (pitch, K_v) in node insertion order.
    pub vertex_curvatures: Vec<(u8, f64)>,
    pub total_vertex_curvature: f64,
}

impl CurvatureReport {
    pub fn compute(
        c: &SimplicialComplex,
        mode: VertexCurvatureMode,
    ) -> Result<Self, CurvatureError> {
        let d = c.dimension().unwrap_or(0);
        let mut per_order = BTreeMap::new();
        let mut order_summaries = Vec::new();
        for order in 1..=d.max(1) {
            if c.count(order) == 0 {
                continue;
            }
            let mut values = Vec::with_capacity(c.count(order));
            for s in c.simplices(order) {
                values.push((s.clone(), forman_p(c, s)?));
            }
            let sum: i64 = values.iter().map(|(_, f)| f).sum();
            order_summaries.push(OrderSummary {
                order,
                mean: sum as f64 / values.len() as f64,
                min: values.iter().map(|(_, f)| *f).min().unwrap(),
                max: values.iter().map(|(_, f)| *f).max().unwrap(),
            });
            per_order.insert(order, values);
        }

        let mut vertex_curvatures = Vec::new();
        let mut total = Rational64::zero();
        for v in c.nodes().collect::<Vec<_>>() {
            let k = gaussian_vertex_exact(c, v, mode)?;
            total += k;
            vertex_curvatures.push((v, rational_to_f64(k)));
        }
        Ok(CurvatureReport {
            mode,
            per_order,
            order_summaries,
            vertex_curvatures,
            total_vertex_curvature: rational_to_f64(total),
        })
    }

    /// `order,simplex,curvature` rows; order 0 rows carry vertex curvature.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,simplex,curvature\n");
        for (v, k) in &self.vertex_curvatures {
            out.push_str(&format!("0,{v},{k}\n"));
        }
        for (order, values) in &self.per_order {
            for (s, f) in values {
                out.push_str(&format!("{order},{},{f}\n", s.label()));
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "mode": self.mode,
            "orders": self.order_summaries,
            "total_vertex_curvature": self.total_vertex_curvature,
        })
    }
}

/// Per-step curvature digest carried by evolution series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSummary {
    /// Mean Forman curvature per order, index 0 ↔ order 1. NaN when the
    /// order has no simplices.
    pub mean_forman: Vec<f64>,
    /// Σ_v K_v in the configured vertex mode.
    pub sum_vertex_curvature: f64,
}

impl CurvatureSummary {
    pub fn compute(
        c: &SimplicialComplex,
        mode: VertexCurvatureMode,
    ) -> Result<Self, CurvatureError> {
        let d = c.dimension().unwrap_or(0);
        let mut mean_forman = Vec::new();
        for order in 1..=d {
            let n = c.count(order);
            if n == 0 {
                mean_forman.push(f64::NAN);
                continue;
            }
            let mut sum = 0i64;
            for s in c.simplices(order) {
                sum += forman_p(c, s)?;
            }
            mean_forman.push(sum as f64 / n as f64);
        }
        let total = total_vertex_curvature_exact(c, mode)?;
        Ok(CurvatureSummary {
            mean_forman,
            sum_vertex_curvature: rational_to_f64(total),
        })
    }
}

/// (χ, Σ_v K_v) pairs over an evolution, with the least-squares line of
/// ΣK against χ and the size normalization α = 1/N_0 at the final step.
#[derive(Debug, Clone, Serialize)]
pub struct GaussBonnetSeries {
    pub points: Vec<(i64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// 1/N_0 of the final complex.
    pub alpha: f64,
    /// The α that would rescale the fitted slope onto 2π, i.e. 2π/slope.
    pub alpha_fitted: Option<f64>,
    /// α·slope/(2π): 1 when the rescaled series matches Gauss-Bonnet.
    pub ratio: Option<f64>,
    /// Constant χ: the slope is undefined.
    pub degenerate: bool,
}

/// Pair the Euler characteristic with the total vertex curvature at every
/// step and fit ΣK = slope·χ + intercept.
pub fn gauss_bonnet_series(series: &EvolutionSeries) -> Result<GaussBonnetSeries, CurvatureError> {
    if series.steps.len() < 3 {
        return Err(CurvatureError::SeriesTooShort {
            needed: 3,
            got: series.steps.len(),
        });
    }
    let points: Vec<(i64, f64)> = series
        .steps
        .iter()
        .map(|s| (s.topology.euler, s.curvature.sum_vertex_curvature))
        .collect();
    let final_n0 = series
        .steps
        .last()
        .map(|s| s.topology.simplex_counts.first().copied().unwrap_or(0))
        .unwrap_or(0);
    let alpha = if final_n0 > 0 {
        1.0 / final_n0 as f64
    } else {
        f64::NAN
    };

    let x: Vec<f64> = points.iter().map(|&(chi, _)| chi as f64).collect();
    let y: Vec<f64> = points.iter().map(|&(_, k)| k).collect();
    match fitting::fit_linear(&x, &y) {
        Ok(fit) => {
            let slope = fit.params[0];
            let two_pi = 2.0 * std::f64::consts::PI;
            Ok(GaussBonnetSeries {
                points,
                slope: Some(slope),
                intercept: Some(fit.params[1]),
                alpha,
                alpha_fitted: (slope != 0.0).then(|| two_pi / slope),
                ratio: Some(alpha * slope / two_pi),
                degenerate: false,
            })
        }
        Err(FitError::DegenerateX) => Ok(GaussBonnetSeries {
            points,
            slope: None,
            intercept: None,
            alpha,
            alpha_fitted: None,
            ratio: None,
            degenerate: true,
        }),
        Err(_) => unreachable!("linear fit on ≥3 points only fails on degenerate x"),
    }
}
