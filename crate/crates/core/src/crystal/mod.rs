//! Diamond bulk, slab and step geometries with coordination analysis.

mod dbs;
mod lattice;
mod neighbors;
mod step;
mod terminate;

pub use dbs::{
    coordination, enumerate_dbs, missing_bond_directions, valence, DbEntry, DbReport,
};
pub use lattice::{build_bulk, cut_slab, MillerIndex};
pub use neighbors::{neighbor_list, pair_cutoff, Adjacency, Neighbor};
pub use step::{
    carve_chadi_step, depth_below_local_surface, raise_trench_carbon, trench_sites, StepAxis,
};
pub use terminate::{
    classify_sites, terminate, EdgeVariant, SiteClass, Terminator, TerminationRules, VacantSite,
};

use crate::constants::ANGSTROM2_TO_CM2;
use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default C–C bond cutoff, Å.
pub const DEFAULT_BOND_CUTOFF: f64 = 1.85;
/// Closest approach allowed between any two atoms, Å.
pub const MIN_SEPARATION: f64 = 0.7;
/// Smallest vacuum gap accepted for a slab, Å.
pub const MIN_VACUUM: f64 = 10.0;

pub const BOND_CH: f64 = 1.09;
pub const BOND_CO: f64 = 1.43;
pub const BOND_OH: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    H,
    C,
    O,
}

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::C => "C",
            Element::O => "O",
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Element::H),
            "C" => Ok(Element::C),
            "O" => Ok(Element::O),
            other => Err(Error::InvalidInput(format!("unknown element `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "bulk")]
    Bulk,
    #[serde(rename = "surface")]
    Surface,
    #[serde(rename = "terminator-H")]
    TerminatorH,
    #[serde(rename = "terminator-O-bridge")]
    TerminatorOBridge,
    #[serde(rename = "terminator-OH")]
    TerminatorOh,
    #[serde(rename = "floating-C")]
    FloatingC,
    #[serde(rename = "db-host")]
    DbHost,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Bulk => "bulk",
            Role::Surface => "surface",
            Role::TerminatorH => "terminator-H",
            Role::TerminatorOBridge => "terminator-O-bridge",
            Role::TerminatorOh => "terminator-OH",
            Role::FloatingC => "floating-C",
            Role::DbHost => "db-host",
        }
    }

    pub fn is_terminator(self) -> bool {
        matches!(
            self,
            Role::TerminatorH | Role::TerminatorOBridge | Role::TerminatorOh
        )
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Role::Bulk,
            Role::Surface,
            Role::TerminatorH,
            Role::TerminatorOBridge,
            Role::TerminatorOh,
            Role::FloatingC,
            Role::DbHost,
        ]
        .into_iter()
        .find(|r| r.tag() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown role `{s}`")))
    }
}

/// Periodic cell; `vectors[k]` is the k-th lattice vector in Å.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub vectors: [[f64; 3]; 3],
    pub periodic: [bool; 3],
}

impl Cell {
    pub fn new(vectors: [[f64; 3]; 3], periodic: [bool; 3]) -> Result<Self> {
        let cell = Cell { vectors, periodic };
        if !(cell.volume() > 1e-9) || cell.vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Geometry(
                "cell vectors must be finite and right-handed with positive volume".into(),
            ));
        }
        Ok(cell)
    }

    pub fn orthorhombic(lengths: [f64; 3], periodic: [bool; 3]) -> Result<Self> {
        Cell::new(
            [
                [lengths[0], 0.0, 0.0],
                [0.0, lengths[1], 0.0],
                [0.0, 0.0, lengths[2]],
            ],
            periodic,
        )
    }

    pub fn vector(&self, k: usize) -> Vector3<f64> {
        Vector3::from(self.vectors[k])
    }

    /// Columns are the lattice vectors.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.vector(0), self.vector(1), self.vector(2)])
    }

    pub fn volume(&self) -> f64 {
        self.matrix().determinant()
    }

    /// Distance between the two lattice planes spanned by the other two vectors.
    pub fn plane_spacing(&self, k: usize) -> f64 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        self.volume() / self.vector(i).cross(&self.vector(j)).norm()
    }

    pub fn to_fractional(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.matrix().try_inverse().expect("cell is invertible") * p
    }

    pub fn to_cartesian(&self, f: &Vector3<f64>) -> Vector3<f64> {
        self.matrix() * f
    }

    /// Wraps a position into the cell along periodic axes.
    pub fn wrap(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let mut f = self.to_fractional(p);
        if (0..3).all(|k| !self.periodic[k] || (0.0..1.0).contains(&f[k])) {
            return *p;
        }
        for k in 0..3 {
            if self.periodic[k] {
                f[k] -= f[k].floor();
                if f[k] >= 1.0 {
                    f[k] = 0.0;
                }
            }
        }
        self.to_cartesian(&f)
    }

    /// Shortest image of a displacement along periodic axes.
    pub fn minimum_image(&self, d: &Vector3<f64>) -> Vector3<f64> {
        let mut f = self.to_fractional(d);
        for k in 0..3 {
            if self.periodic[k] {
                f[k] -= f[k].round();
            }
        }
        self.to_cartesian(&f)
    }

    /// Area spanned by the first two lattice vectors, Å².
    pub fn in_plane_area(&self) -> f64 {
        self.vector(0).cross(&self.vector(1)).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub species: Element,
    pub position: [f64; 3],
    pub role: Role,
}

impl Atom {
    pub fn new(species: Element, position: Vector3<f64>, role: Role) -> Self {
        Atom {
            species,
            position: [position.x, position.y, position.z],
            role,
        }
    }

    pub fn pos(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub cell: Cell,
    pub atoms: Vec<Atom>,
    pub bond_cutoff: f64,
}

impl Structure {
    /// Builds a structure, wrapping atoms into the cell and checking separations.
    pub fn new(cell: Cell, atoms: Vec<Atom>, bond_cutoff: f64) -> Result<Self> {
        if !(bond_cutoff > 0.0) {
            return Err(Error::InvalidInput("bond cutoff must be positive".into()));
        }
        let atoms = atoms
            .into_iter()
            .map(|a| Atom::new(a.species, cell.wrap(&a.pos()), a.role))
            .collect();
        let s = Structure {
            cell,
            atoms,
            bond_cutoff,
        };
        s.check_separation()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn position(&self, i: usize) -> Vector3<f64> {
        self.atoms[i].pos()
    }

    /// Minimum-image displacement from atom `i` to atom `j`.
    pub fn displacement(&self, i: usize, j: usize) -> Vector3<f64> {
        self.cell
            .minimum_image(&(self.position(j) - self.position(i)))
    }

    /// Smallest interatomic distance over all periodic images.
    pub fn min_distance(&self) -> f64 {
        let adj = neighbors::within(self, MIN_SEPARATION.max(1.0));
        adj.iter()
            .flatten()
            .map(|n| n.distance)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_separation(&self) -> Result<()> {
        let d = self.min_distance();
        if d < MIN_SEPARATION {
            return Err(Error::Geometry(format!(
                "atoms closer than {MIN_SEPARATION} Å (found {d:.4} Å)"
            )));
        }
        Ok(())
    }

    pub fn count(&self, species: Element) -> usize {
        self.atoms.iter().filter(|a| a.species == species).count()
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.atoms[i].role == role).collect()
    }
}

/// Areal density of `n_spins` over the in-plane cell, in spins per cm².
pub fn spin_areal_density(s: &Structure, n_spins: usize) -> Result<f64> {
    let area = s.cell.in_plane_area();
    if !(area > 0.0) {
        return Err(Error::Geometry("in-plane cell area is zero".into()));
    }
    Ok(n_spins as f64 / (area * ANGSTROM2_TO_CM2))
}

/// Settings of the stepped model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepModelSpec {
    pub lattice_param: f64,
    pub layers: usize,
    pub lateral_repeats: (usize, usize),
    pub vacuum: f64,
    pub upper_terrace_width: usize,
    pub edge_variant: EdgeVariant,
}

impl Default for StepModelSpec {
    fn default() -> Self {
        StepModelSpec {
            lattice_param: crate::constants::DIAMOND_LATTICE_A,
            layers: 9,
            lateral_repeats: (6, 6),
            vacuum: MIN_VACUUM,
            upper_terrace_width: 3,
            edge_variant: EdgeVariant::OHH,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepModel {
    pub structure: Structure,
    /// Index of the carbon left with the single dangling bond.
    pub host: usize,
    pub floating: usize,
}

/// Slab → step → raised trench carbon → termination.
///
/// Among the valid trench carbons the one closest to the in-plane cell centre
/// is raised (lowest index on ties).
pub fn build_step_model(spec: &StepModelSpec) -> Result<StepModel> {
    let slab = cut_slab(
        spec.lattice_param,
        MillerIndex(1, 0, 0),
        spec.layers,
        spec.lateral_repeats,
        spec.vacuum,
    )?;
    let stepped = carve_chadi_step(&slab, StepAxis::Y, spec.upper_terrace_width)?;
    let centre = (stepped.cell.vector(0) + stepped.cell.vector(1)) / 2.0;
    let lateral = |i: usize| {
        let mut d = stepped.cell.minimum_image(&(stepped.position(i) - centre));
        d.z = 0.0;
        d.norm()
    };
    let site = trench_sites(&stepped)
        .into_iter()
        .min_by(|&i, &j| lateral(i).total_cmp(&lateral(j)).then(i.cmp(&j)))
        .ok_or_else(|| Error::Geometry("the stepped slab has no trench carbon to raise".into()))?;
    let raised = raise_trench_carbon(&stepped, site)?;
    let structure = terminate(&raised, &TerminationRules::paper(spec.edge_variant))?;
    let host = structure.indices_with_role(Role::DbHost)[0];
    Ok(StepModel {
        structure,
        host,
        floating: site,
    })
}
