//! Merging of badly cut cells with a neighbor so that every cut cell of the
//! resulting mesh contains a ball of radius `delta* h` on both sides.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::geometry::{check_assumption_ball, CellGeometry, CellTag, CutTopology};
use crate::mesh::{CellMeta, PolyMesh};
use crate::{Error, Result, Side};

/// Cut threshold `rho^3 / 4`.
pub fn default_delta(rho: f64) -> f64 {
    rho.powi(3) / 4.0
}

/// Post-agglomeration threshold `rho^4 / 12`.
pub fn default_delta_star(rho: f64) -> f64 {
    rho.powi(4) / 12.0
}

/// Cut cells split by which side (if any) fails the ball condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CutPartition {
    pub ok: Vec<usize>,
    pub ko1: Vec<usize>,
    pub ko2: Vec<usize>,
    pub delta: f64,
    /// Inscribed-ball radius of both sides for every cut cell.
    pub radii: BTreeMap<usize, [f64; 2]>,
}

impl CutPartition {
    pub fn census(&self) -> [usize; 3] {
        [self.ok.len(), self.ko1.len(), self.ko2.len()]
    }
}

pub fn partition_cut_cells(mesh: &PolyMesh, topo: &CutTopology, delta: f64) -> Result<CutPartition> {
    let cut: Vec<usize> = topo.cut_cells().collect();
    let checks: Vec<_> =
        cut.par_iter().map(|&c| check_assumption_ball(&CellGeometry::from_parents(mesh, topo, &[c]), delta)).collect();
    let mut p = CutPartition { ok: vec![], ko1: vec![], ko2: vec![], delta, radii: BTreeMap::new() };
    for (&c, [b1, b2]) in cut.iter().zip(checks) {
        p.radii.insert(c, [b1.radius, b2.radius]);
        match (b1.pass, b2.pass) {
            (true, true) => p.ok.push(c),
            (false, true) => p.ko1.push(c),
            (true, false) => p.ko2.push(c),
            (false, false) => return Err(Error::MeshTooCoarse { cell: c, delta }),
        }
    }
    Ok(p)
}

/// Chosen merge partners `N_1(T)` and `N_2(T)`, and the KO2 cells absorbed
/// in step 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborSelection {
    pub n1: BTreeMap<usize, usize>,
    pub n2: BTreeMap<usize, usize>,
    pub ko2_hat: BTreeSet<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Ok,
    Ko(Side),
    Inside(Side),
}

fn classes(topo: &CutTopology, partition: &CutPartition) -> Vec<Class> {
    let mut c: Vec<Class> = topo
        .tags
        .iter()
        .map(|t| match t {
            CellTag::Inside1 => Class::Inside(Side::One),
            CellTag::Inside2 => Class::Inside(Side::Two),
            CellTag::Cut => Class::Ok,
        })
        .collect();
    for &t in &partition.ko1 {
        c[t] = Class::Ko(Side::One);
    }
    for &t in &partition.ko2 {
        c[t] = Class::Ko(Side::Two);
    }
    c
}

fn choose(
    mesh: &PolyMesh,
    meta: &[CellMeta],
    partition: &CutPartition,
    class: &[Class],
    cell: usize,
    side: Side,
) -> Result<usize> {
    let admissible = |c: Class| match c {
        Class::Ok => true,
        Class::Inside(s) => s == side,
        Class::Ko(s) => s != side,
    };
    let radius = |n: usize| match class[n] {
        Class::Inside(_) => meta[n].radius,
        _ => partition.radii.get(&n).map_or(0.0, |r| r[side.index()]),
    };
    meta[cell]
        .neighbors
        .iter()
        .copied()
        .filter(|&n| n != cell && admissible(class[n]))
        .min_by(|&a, &b| {
            let fa = mesh.shared_face(cell, a).is_none();
            let fb = mesh.shared_face(cell, b).is_none();
            fa.cmp(&fb).then(radius(b).total_cmp(&radius(a))).then(a.cmp(&b))
        })
        .ok_or(Error::NoSuitableNeighbor { cell, side: side.number(), h: meta[cell].h, delta: partition.delta })
}

/// Step 1 picks `N_1(T)` for `T` in KO1; step 2 picks `N_2(T)` for the KO2
/// cells not absorbed in step 1. Ties prefer face neighbors, then the
/// largest side-`i` inscribed ball, then the lowest index.
pub fn select_neighbors(
    mesh: &PolyMesh,
    topo: &CutTopology,
    meta: &[CellMeta],
    partition: &CutPartition,
) -> Result<NeighborSelection> {
    let class = classes(topo, partition);
    let mut sel = NeighborSelection::default();
    for &t in &partition.ko1 {
        let n = choose(mesh, meta, partition, &class, t, Side::One)?;
        if class[n] == Class::Ko(Side::Two) {
            sel.ko2_hat.insert(n);
        }
        sel.n1.insert(t, n);
    }
    for &t in &partition.ko2 {
        if !sel.ko2_hat.contains(&t) {
            sel.n2.insert(t, choose(mesh, meta, partition, &class, t, Side::Two)?);
        }
    }
    Ok(sel)
}

/// A computational cell made of one or more parents.
#[derive(Debug, Clone, PartialEq)]
pub struct Agglomerate {
    /// Sorted parent cells.
    pub parents: Vec<usize>,
    /// The cell the KO cells were merged into (the parent itself when
    /// unmerged).
    pub seed: usize,
}

/// Mesh of agglomerates with their geometry.
#[derive(Debug, Clone)]
pub struct AgglomeratedMesh {
    pub agglomerates: Vec<Agglomerate>,
    pub parent_to_cell: Vec<usize>,
    pub cells: Vec<CellGeometry>,
    pub delta_star: f64,
}

impl AgglomeratedMesh {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_merged(&self) -> usize {
        self.agglomerates.iter().filter(|a| a.parents.len() > 1).count()
    }

    pub fn num_cut(&self) -> usize {
        self.cells.iter().filter(|c| c.is_cut()).count()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges each KO cell with its chosen neighbor (overlapping choices are
/// joined transitively), rebuilds the geometry of merged cells and asserts
/// the ball condition at `delta_star` on every cut cell.
pub fn agglomerate(
    mesh: &PolyMesh,
    topo: &CutTopology,
    partition: &CutPartition,
    selection: &NeighborSelection,
    delta_star: f64,
) -> Result<AgglomeratedMesh> {
    let n = mesh.num_cells();
    let mut uf: Vec<usize> = (0..n).collect();
    let merged: BTreeSet<usize> = selection.n1.keys().chain(selection.n2.keys()).copied().collect();
    for (&t, &m) in selection.n1.iter().chain(&selection.n2) {
        let (a, b) = (find(&mut uf, t), find(&mut uf, m));
        if a != b {
            uf[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in 0..n {
        let r = find(&mut uf, c);
        groups.entry(r).or_default().push(c);
    }
    let mut agglomerates: Vec<Agglomerate> = groups
        .into_values()
        .map(|parents| {
            let seed = parents.iter().copied().find(|p| !merged.contains(p)).unwrap_or(parents[0]);
            Agglomerate { parents, seed }
        })
        .collect();
    agglomerates.sort_by_key(|a| a.parents[0]);
    let mut parent_to_cell = vec![0; n];
    for (i, a) in agglomerates.iter().enumerate() {
        for &p in &a.parents {
            parent_to_cell[p] = i;
        }
    }
    let cells: Vec<CellGeometry> = agglomerates
        .par_iter()
        .enumerate()
        .map(|(id, a)| {
            let mut g = CellGeometry::from_parents(mesh, topo, &a.parents);
            if !g.is_cut() {
                return Ok(g);
            }
            if a.parents.len() == 1 {
                let r = partition.radii[&a.parents[0]];
                for side in [Side::One, Side::Two] {
                    let required = delta_star * g.h;
                    if r[side.index()] < required {
                        return Err(Error::AgglomerationFailed {
                            cell: id,
                            side: side.number(),
                            radius: r[side.index()],
                            required,
                        });
                    }
                }
                return Ok(g);
            }
            g.connect_interface(id)?;
            for (side, b) in [Side::One, Side::Two].into_iter().zip(check_assumption_ball(&g, delta_star)) {
                if !b.pass {
                    return Err(Error::AgglomerationFailed {
                        cell: id,
                        side: side.number(),
                        radius: b.radius,
                        required: b.required,
                    });
                }
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;
    Ok(AgglomeratedMesh { agglomerates, parent_to_cell, cells, delta_star })
}

/// Partition, neighbor selection and merging in one call.
pub fn agglomerate_mesh(
    mesh: &PolyMesh,
    topo: &CutTopology,
    meta: &[CellMeta],
    delta: f64,
    delta_star: f64,
) -> Result<(CutPartition, NeighborSelection, AgglomeratedMesh)> {
    let partition = partition_cut_cells(mesh, topo, delta)?;
    let selection = select_neighbors(mesh, topo, meta, &partition)?;
    let agg = agglomerate(mesh, topo, &partition, &selection, delta_star)?;
    Ok((partition, selection, agg))
}
