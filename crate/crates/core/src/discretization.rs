//! Discretizations along the boundary coordinate σ.
//!
//! Every operator in this crate is a quadratic form assembled on a set of
//! σ-nodes taken from the uniform ring grid σ_i = (i − N/2)Δ, optionally
//! tensored with a transverse τ-grid ("rows"). A [`SigmaLayout`] records
//! which ring nodes are unknowns, their dual cell widths and the σ-edges,
//! which covers the periodic ring, Dirichlet intervals and the two
//! reflection sectors of a symmetric boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::wrap_sigma;
use crate::linalg::{Ordering, SymSparse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    /// The full ring.
    Periodic,
    /// A Dirichlet path of ring nodes.
    Interval,
    /// σ ∈ [0, L], Neumann (half cells) at both ends: even functions.
    EvenHalf,
    /// σ ∈ (0, L), Dirichlet at both ends: odd functions.
    OddHalf,
}

/// σ-edge between two unknowns; `None` marks a Dirichlet end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: Option<usize>,
    pub b: Option<usize>,
    /// Midpoint, reduced to (−L, L].
    pub mid: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaLayout {
    pub kind: LayoutKind,
    pub half_length: f64,
    pub n_ring: usize,
    pub step: f64,
    /// Ring index of every unknown, in path order.
    pub ring_index: Vec<usize>,
    /// σ of every unknown along the path (continuous, may leave (−L, L]).
    pub sigma: Vec<f64>,
    pub cell: Vec<f64>,
    pub edges: Vec<Edge>,
}

/// σ of ring node i.
pub fn ring_sigma(i: usize, n_ring: usize, half_length: f64) -> f64 {
    (i as f64 - (n_ring / 2) as f64) * (2.0 * half_length / n_ring as f64)
}

/// Ring index of the mirror image σ → −σ.
pub fn ring_reflect(i: usize, n_ring: usize) -> usize {
    (n_ring - i) % n_ring
}

impl SigmaLayout {
    fn check(n_ring: usize, half_length: f64) -> Result<()> {
        if n_ring < 8 || n_ring % 4 != 0 {
            return Err(Error::InvalidParameter(format!("ring size {n_ring} must be a multiple of 4, ≥ 8")));
        }
        if !(half_length > 0.0) {
            return Err(Error::InvalidParameter("half length must be positive".into()));
        }
        Ok(())
    }

    pub fn periodic(half_length: f64, n_ring: usize) -> Result<Self> {
        Self::check(n_ring, half_length)?;
        let step = 2.0 * half_length / n_ring as f64;
        let sigma: Vec<f64> = (0..n_ring).map(|i| ring_sigma(i, n_ring, half_length)).collect();
        let edges = (0..n_ring)
            .map(|i| Edge {
                a: Some(i),
                b: Some((i + 1) % n_ring),
                mid: wrap_sigma(sigma[i] + 0.5 * step, half_length),
            })
            .collect();
        Ok(Self {
            kind: LayoutKind::Periodic,
            half_length,
            n_ring,
            step,
            ring_index: (0..n_ring).collect(),
            sigma,
            cell: vec![step; n_ring],
            edges,
        })
    }

    /// Unknowns are the ring nodes strictly between `lo` and `hi` (path
    /// coordinates, lo < hi, snapped to the nearest ring nodes, which
    /// become the Dirichlet ends).
    pub fn interval(half_length: f64, n_ring: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::check(n_ring, half_length)?;
        let step = 2.0 * half_length / n_ring as f64;
        let k_lo = ((lo + half_length) / step).round() as i64;
        let k_hi = ((hi + half_length) / step).round() as i64;
        let count = k_hi - k_lo - 1;
        if count < 3 || count >= n_ring as i64 {
            return Err(Error::InvalidParameter(format!("interval ({lo}, {hi}) holds {count} nodes")));
        }
        let mut ring_index = Vec::with_capacity(count as usize);
        let mut sigma = Vec::with_capacity(count as usize);
        for k in (k_lo + 1)..k_hi {
            ring_index.push(k.rem_euclid(n_ring as i64) as usize);
            sigma.push(-half_length + k as f64 * step);
        }
        let n = sigma.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(Edge { a: None, b: Some(0), mid: wrap_sigma(sigma[0] - 0.5 * step, half_length) });
        for i in 0..n - 1 {
            edges.push(Edge { a: Some(i), b: Some(i + 1), mid: wrap_sigma(sigma[i] + 0.5 * step, half_length) });
        }
        edges.push(Edge { a: Some(n - 1), b: None, mid: wrap_sigma(sigma[n - 1] + 0.5 * step, half_length) });
        Ok(Self { kind: LayoutKind::Interval, half_length, n_ring, step, ring_index, sigma, cell: vec![step; n], edges })
    }

    pub fn even_half(half_length: f64, n_ring: usize) -> Result<Self> {
        Self::check(n_ring, half_length)?;
        let step = 2.0 * half_length / n_ring as f64;
        let half = n_ring / 2;
        let ring_index: Vec<usize> = (0..=half).map(|k| (half + k) % n_ring).collect();
        let sigma: Vec<f64> = (0..=half).map(|k| k as f64 * step).collect();
        let mut cell = vec![step; half + 1];
        cell[0] = 0.5 * step;
        cell[half] = 0.5 * step;
        let edges = (0..half)
            .map(|k| Edge { a: Some(k), b: Some(k + 1), mid: sigma[k] + 0.5 * step })
            .collect();
        Ok(Self { kind: LayoutKind::EvenHalf, half_length, n_ring, step, ring_index, sigma, cell, edges })
    }

    pub fn odd_half(half_length: f64, n_ring: usize) -> Result<Self> {
        Self::check(n_ring, half_length)?;
        let step = 2.0 * half_length / n_ring as f64;
        let half = n_ring / 2;
        let ring_index: Vec<usize> = (1..half).map(|k| half + k).collect();
        let sigma: Vec<f64> = (1..half).map(|k| k as f64 * step).collect();
        let n = sigma.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(Edge { a: None, b: Some(0), mid: 0.5 * step });
        for k in 0..n - 1 {
            edges.push(Edge { a: Some(k), b: Some(k + 1), mid: sigma[k] + 0.5 * step });
        }
        edges.push(Edge { a: Some(n - 1), b: None, mid: half_length - 0.5 * step });
        Ok(Self { kind: LayoutKind::OddHalf, half_length, n_ring, step, ring_index, sigma, cell: vec![step; n], edges })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Node holding ring index r, if any.
    pub fn node_of_ring(&self, r: usize) -> Option<usize> {
        self.ring_index.iter().position(|&x| x == r)
    }
}

/// A quadratic form on (σ-node, row) unknowns with diagonal mass.
/// Unknown (i, j) has natural index i·rows + j.
#[derive(Debug, Clone)]
pub struct LayeredOperator {
    pub layout: SigmaLayout,
    pub rows: usize,
    pub stiffness: SymSparse,
    pub mass: Vec<f64>,
    /// Per edge and row, the weight c of the form term c·(u_a − u_b)².
    pub coupling: Vec<f64>,
}

impl LayeredOperator {
    pub fn index(&self, node: usize, row: usize) -> usize {
        node * self.rows + row
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// The cheaper of σ-major (folded for rings) and τ-major orderings.
    pub fn ordering(&self) -> Ordering {
        let n = self.layout.len();
        let rows = self.rows;
        let periodic = self.layout.kind == LayoutKind::Periodic;
        let sigma_band = if periodic { 2 * rows } else { rows };
        let tau_band = n + 1;
        let node_pos: Vec<usize> = if periodic {
            let mut order = Vec::with_capacity(n);
            let (mut lo, mut hi) = (0usize, n - 1);
            while lo <= hi {
                order.push(lo);
                if hi != lo {
                    order.push(hi);
                }
                lo += 1;
                if hi == 0 {
                    break;
                }
                hi -= 1;
            }
            let mut pos = vec![0; n];
            for (p, &i) in order.iter().enumerate() {
                pos[i] = p;
            }
            pos
        } else {
            (0..n).collect()
        };
        let pos: Vec<usize> = if rows > 1 && tau_band < sigma_band {
            (0..n * rows).map(|idx| (idx % rows) * n + node_pos[idx / rows]).collect()
        } else {
            (0..n * rows).map(|idx| node_pos[idx / rows] * rows + idx % rows).collect()
        };
        Ordering::from_positions(pos)
    }

    /// Rayleigh quotient xᵀKx / xᵀMx.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        self.stiffness.bilinear(x, x) / crate::linalg::m_dot(&self.mass, x, x)
    }

    /// Column `node` of a vector.
    pub fn column<'a>(&self, x: &'a [f64], node: usize) -> &'a [f64] {
        &x[node * self.rows..(node + 1) * self.rows]
    }

    /// Expand a per-node log weight to all unknowns.
    pub fn expand_weight(&self, per_node: &[f64]) -> Vec<f64> {
        per_node.iter().flat_map(|&g| std::iter::repeat(g).take(self.rows)).collect()
    }

    /// Write the stiffness matrix as coordinate triplets.
    pub fn dump_stiffness<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write_triplets(&mut w, self.stiffness.n, self.stiffness.triplets())
    }

    /// Write the (diagonal) mass matrix as coordinate triplets.
    pub fn dump_mass<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.mass.len();
        write_triplets(&mut w, n, self.mass.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }
}

pub const DUMP_MAGIC: &[u8; 8] = b"CBTRIP01";

/// Coordinate format: 8-byte magic, u64 rows, u64 cols, then records of
/// (u64 row, u64 col, f64 value), all little-endian.
pub fn write_triplets<W: std::io::Write, I: Iterator<Item = (usize, usize, f64)>>(w: &mut W, n: usize, it: I) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    for (i, j, v) in it {
        w.write_all(&(i as u64).to_le_bytes())?;
        w.write_all(&(j as u64).to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read one triplet block back; returns the dimension and the entries.
pub fn read_triplets<R: std::io::Read>(r: &mut R) -> std::io::Result<(usize, Vec<(usize, usize, f64)>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "bad magic"));
    }
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    r.read_exact(&mut b)?;
    let mut out = Vec::new();
    loop {
        let mut rec = [0u8; 24];
        match r.read_exact(&mut rec[..8]) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e),
        }
        r.read_exact(&mut rec[8..])?;
        let i = u64::from_le_bytes(rec[..8].try_into().unwrap()) as usize;
        let j = u64::from_le_bytes(rec[8..16].try_into().unwrap()) as usize;
        let v = f64::from_le_bytes(rec[16..].try_into().unwrap());
        out.push((i, j, v));
    }
    Ok((n, out))
}

/// Splitting of a symmetric double well from the two sector ground states,
/// by the exact discrete identity
/// λ₋ − λ₊ = ⟨u₊, [χ, K] u₋⟩ / ⟨u₊, χ M u₋⟩, χ = 1 on (0, L).
/// Only the σ-edges crossing σ = 0 and σ = L contribute to the numerator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxSplitting {
    pub splitting: f64,
    /// Contribution of the cut at σ = 0 (upper arc).
    pub upper: f64,
    /// Contribution of the cut at σ = L (lower arc).
    pub lower: f64,
    pub overlap: f64,
}

pub fn flux_splitting(even: &LayeredOperator, u_even: &[f64], odd: &LayeredOperator, u_odd: &[f64]) -> Result<FluxSplitting> {
    if even.layout.kind != LayoutKind::EvenHalf || odd.layout.kind != LayoutKind::OddHalf {
        return Err(Error::GridMismatch("flux splitting needs the even and odd half sectors".into()));
    }
    if even.rows != odd.rows || even.layout.n_ring != odd.layout.n_ring {
        return Err(Error::GridMismatch("sector grids differ".into()));
    }
    let rows = even.rows;
    let ne = even.layout.len();
    let no = odd.layout.len();
    if ne != no + 2 {
        return Err(Error::GridMismatch("sector sizes inconsistent".into()));
    }
    let first = 0;
    let last = even.layout.edges.len() - 1;
    let mut upper = Vec::with_capacity(rows);
    let mut lower = Vec::with_capacity(rows);
    for j in 0..rows {
        let c0 = even.coupling[first * rows + j];
        let cl = even.coupling[last * rows + j];
        upper.push(c0 * u_even[j] * u_odd[j]);
        lower.push(cl * u_even[(ne - 1) * rows + j] * u_odd[(no - 1) * rows + j]);
    }
    let upper = crate::quadrature::compensated_sum(upper);
    let lower = crate::quadrature::compensated_sum(lower);
    // interior even nodes 1..ne-1 align with odd nodes 0..no
    let overlap = crate::quadrature::compensated_sum(
        (0..no * rows).map(|idx| odd.mass[idx] * u_even[rows + idx] * u_odd[idx]),
    );
    Ok(FluxSplitting { splitting: (upper + lower) / overlap, upper: upper / overlap, lower: lower / overlap, overlap })
}

/// Extend a sector vector (per node, `rows` values) to the full ring by
/// even or odd reflection.
pub fn extend_to_ring(layout: &SigmaLayout, rows: usize, x: &[f64], odd: bool) -> Vec<f64> {
    let n = layout.n_ring;
    let mut out = vec![0.0; n * rows];
    let sign = if odd { -1.0 } else { 1.0 };
    for (node, &r) in layout.ring_index.iter().enumerate() {
        let m = ring_reflect(r, n);
        for j in 0..rows {
            let v = x[node * rows + j];
            out[r * rows + j] = v;
            if m != r {
                out[m * rows + j] = sign * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_layouts_tile_the_ring() {
        let l = 2.0;
        let n = 16;
        let e = SigmaLayout::even_half(l, n).unwrap();
        let o = SigmaLayout::odd_half(l, n).unwrap();
        assert_eq!(e.len(), 9);
        assert_eq!(o.len(), 7);
        assert_eq!(e.ring_index[0], 8);
        assert_eq!(*e.ring_index.last().unwrap(), 0);
        let total: f64 = e.cell.iter().sum();
        assert!((total - l).abs() < 1e-14);
        assert_eq!(ring_reflect(3, 16), 13);
        assert_eq!(ring_reflect(0, 16), 0);
        assert!((ring_sigma(8, 16, l)).abs() < 1e-15);
    }

    #[test]
    fn interval_wraps_through_the_seam() {
        let l = 2.0;
        let n = 40;
        let step = 0.1;
        let lay = SigmaLayout::interval(l, n, 1.0, 1.0 + 2.0 * l - 0.5).unwrap();
        assert_eq!(lay.len(), 34);
        assert_eq!(lay.ring_index[0], ((1.0 + step + l) / step).round() as usize);
        assert!(lay.edges.first().unwrap().a.is_none() && lay.edges.last().unwrap().b.is_none());
        for e in &lay.edges {
            assert!(e.mid > -l && e.mid <= l);
        }
    }
}
