use super::{Element, Structure};
use nalgebra::Vector3;

/// One bonded neighbour seen from a central atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    /// Lattice translation applied to the neighbour.
    pub image: [i32; 3],
    /// Vector from the central atom to the neighbour image, Å.
    pub vector: Vector3<f64>,
    pub distance: f64,
}

/// Per-atom neighbour lists, each sorted by (index, image).
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    pub lists: Vec<Vec<Neighbor>>,
}

impl Adjacency {
    pub fn degree(&self, i: usize) -> usize {
        self.lists[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.lists[i]
    }

    pub fn is_bonded(&self, i: usize, j: usize) -> bool {
        self.lists[i].iter().any(|n| n.index == j)
    }
}

/// Bond cutoff for a species pair; `None` when the pair never bonds.
pub fn pair_cutoff(a: Element, b: Element, cc_cutoff: f64) -> Option<f64> {
    use Element::*;
    match (a.min(b), a.max(b)) {
        (C, C) => Some(cc_cutoff),
        (H, C) => Some(1.30),
        (C, O) => Some(1.65),
        (H, O) => Some(1.17),
        _ => None,
    }
}

/// Bonded neighbours of every atom, honouring periodic images.
pub fn neighbor_list(s: &Structure) -> Adjacency {
    let lists = pairs_within(s, s.bond_cutoff.max(1.65), |i, j, d| {
        pair_cutoff(s.atoms[i].species, s.atoms[j].species, s.bond_cutoff)
            .is_some_and(|c| d < c)
    });
    Adjacency { lists }
}

/// All neighbours closer than `radius` regardless of species.
pub(crate) fn within(s: &Structure, radius: f64) -> Vec<Vec<Neighbor>> {
    pairs_within(s, radius, |_, _, d| d < radius)
}

fn pairs_within(
    s: &Structure,
    radius: f64,
    accept: impl Fn(usize, usize, f64) -> bool,
) -> Vec<Vec<Neighbor>> {
    let cell = &s.cell;
    let mut reach = [0i32; 3];
    for k in 0..3 {
        if cell.periodic[k] {
            reach[k] = (radius / cell.plane_spacing(k) + 0.5).floor() as i32;
        }
    }
    let v = cell.vectors;
    let inv = cell.matrix().try_inverse().expect("cell is invertible");
    let frac: Vec<[f64; 3]> = s
        .atoms
        .iter()
        .map(|a| {
            let f = inv * a.pos();
            [f.x, f.y, f.z]
        })
        .collect();
    let r2 = radius * radius;
    let mut lists = vec![Vec::new(); s.len()];
    for i in 0..s.len() {
        for j in 0..s.len() {
            let mut df = [0.0; 3];
            let mut base = [0i32; 3];
            for k in 0..3 {
                df[k] = frac[j][k] - frac[i][k];
                if cell.periodic[k] {
                    let r = df[k].round();
                    df[k] -= r;
                    base[k] = -(r as i32);
                }
            }
            for a in -reach[0]..=reach[0] {
                for b in -reach[1]..=reach[1] {
                    for c in -reach[2]..=reach[2] {
                        let f = [df[0] + a as f64, df[1] + b as f64, df[2] + c as f64];
                        let mut d = [0.0; 3];
                        for (x, dx) in d.iter_mut().enumerate() {
                            *dx = f[0] * v[0][x] + f[1] * v[1][x] + f[2] * v[2][x];
                        }
                        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                        if d2 > r2 || (i == j && d2 < 1e-18) {
                            continue;
                        }
                        let dist = d2.sqrt();
                        if accept(i, j, dist) {
                            lists[i].push(Neighbor {
                                index: j,
                                image: [base[0] + a, base[1] + b, base[2] + c],
                                vector: Vector3::from(d),
                                distance: dist,
                            });
                        }
                    }
                }
            }
        }
        lists[i].sort_by(|x, y| (x.index, x.image).cmp(&(y.index, y.image)));
    }
    lists
}
