use super::{Atom, Cell, Element, Role, Structure, DEFAULT_BOND_CUTOFF, MIN_VACUUM};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MillerIndex(pub i32, pub i32, pub i32);

impl MillerIndex {
    /// True for any member of the {100} family.
    pub fn is_100_family(self) -> bool {
        let mut v = [self.0.abs(), self.1.abs(), self.2.abs()];
        v.sort();
        v == [0, 0, 1]
    }
}

const DIAMOND_BASIS: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
    [0.25, 0.25, 0.25],
    [0.25, 0.75, 0.75],
    [0.75, 0.25, 0.75],
    [0.75, 0.75, 0.25],
];

/// Conventional diamond cell tiled `repetitions` times, periodic on all axes.
pub fn build_bulk(lattice_param: f64, repetitions: [usize; 3]) -> Result<Structure> {
    if !(lattice_param > 0.0) || !lattice_param.is_finite() {
        return Err(Error::InvalidInput("lattice parameter must be positive".into()));
    }
    if repetitions.contains(&0) {
        return Err(Error::InvalidInput("repetitions must be at least 1".into()));
    }
    let a = lattice_param;
    let cell = Cell::orthorhombic(
        [
            a * repetitions[0] as f64,
            a * repetitions[1] as f64,
            a * repetitions[2] as f64,
        ],
        [true; 3],
    )?;
    let mut atoms = Vec::with_capacity(8 * repetitions.iter().product::<usize>());
    for i in 0..repetitions[0] {
        for j in 0..repetitions[1] {
            for k in 0..repetitions[2] {
                for b in DIAMOND_BASIS {
                    let p = Vector3::new(i as f64 + b[0], j as f64 + b[1], k as f64 + b[2]) * a;
                    atoms.push(Atom::new(Element::C, p, Role::Bulk));
                }
            }
        }
    }
    Structure::new(cell, atoms, DEFAULT_BOND_CUTOFF)
}

/// In-plane offsets of the four-layer stacking, in units of the (1×1) side.
const LAYER_OFFSETS: [[f64; 2]; 4] = [[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

/// Unreconstructed (100) slab with `layers` carbon layers.
///
/// x runs along cubic [1-10], y along [110] and z along the surface normal.
/// Top-layer back-bonds point along ±x and its dangling bonds along ±y.
pub fn cut_slab(
    lattice_param: f64,
    surface: MillerIndex,
    layers: usize,
    lateral_repeats: (usize, usize),
    vacuum: f64,
) -> Result<Structure> {
    if !surface.is_100_family() {
        return Err(Error::UnsupportedSurface(format!(
            "({} {} {}); only (100) is available",
            surface.0, surface.1, surface.2
        )));
    }
    if !(lattice_param > 0.0) || !lattice_param.is_finite() {
        return Err(Error::InvalidInput("lattice parameter must be positive".into()));
    }
    if layers < 6 {
        return Err(Error::InvalidInput(format!("need at least 6 layers, got {layers}")));
    }
    if lateral_repeats.0 == 0 || lateral_repeats.1 == 0 {
        return Err(Error::InvalidInput("lateral repeats must be at least 1".into()));
    }
    if !(vacuum >= MIN_VACUUM) {
        return Err(Error::InvalidInput(format!(
            "vacuum must be at least {MIN_VACUUM} Å, got {vacuum}"
        )));
    }
    let (n, m) = lateral_repeats;
    let side = lattice_param / 2f64.sqrt();
    let spacing = lattice_param / 4.0;
    let thickness = (layers - 1) as f64 * spacing;
    let cell = Cell::orthorhombic(
        [n as f64 * side, m as f64 * side, thickness + vacuum],
        [true, true, false],
    )?;
    let z_bottom = vacuum / 2.0;
    let mut atoms = Vec::with_capacity(layers * n * m);
    for layer in 0..layers {
        let [du, dv] = LAYER_OFFSETS[layer % 4];
        let z = z_bottom + (layers - 1 - layer) as f64 * spacing;
        let role = if layer == 0 || layer == layers - 1 {
            Role::Surface
        } else {
            Role::Bulk
        };
        for i in 0..n {
            for j in 0..m {
                let p = Vector3::new((i as f64 + du) * side, (j as f64 + dv) * side, z);
                atoms.push(Atom::new(Element::C, p, role));
            }
        }
    }
    Structure::new(cell, atoms, DEFAULT_BOND_CUTOFF)
}
