use super::{
    coordination, neighbor_list, Adjacency, Atom, Element, Role, Structure, BOND_CO,
};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Direction of the step edge line in the slab frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepAxis {
    X,
    Y,
}

/// Minimum distance kept between a raised carbon (or its capping site) and
/// any atom it is not bonded to, Å.
const FLIP_CLEARANCE: f64 = 2.3;

/// Lattice quantities recovered from an ideal slab.
pub(crate) struct SlabFrame {
    pub side: f64,
    pub spacing: f64,
    pub z_top: f64,
    pub z_bottom: f64,
}

impl SlabFrame {
    pub fn from_structure(s: &Structure, adj: &Adjacency) -> Result<Self> {
        let mut bond = f64::INFINITY;
        let mut z_top = f64::NEG_INFINITY;
        let mut z_bottom = f64::INFINITY;
        for (i, a) in s.atoms.iter().enumerate() {
            if a.species != Element::C {
                continue;
            }
            for n in adj.neighbors(i) {
                if s.atoms[n.index].species == Element::C {
                    bond = bond.min(n.distance);
                }
            }
            if a.role != Role::FloatingC {
                z_top = z_top.max(a.position[2]);
                z_bottom = z_bottom.min(a.position[2]);
            }
        }
        if !bond.is_finite() {
            return Err(Error::Geometry("structure has no carbon–carbon bonds".into()));
        }
        let a = 4.0 * bond / 3f64.sqrt();
        Ok(SlabFrame {
            side: a / 2f64.sqrt(),
            spacing: a / 4.0,
            z_top,
            z_bottom,
        })
    }

    /// Layer index counted down from the topmost carbon layer.
    pub fn layer(&self, z: f64) -> i64 {
        ((self.z_top - z) / self.spacing).round() as i64
    }

    pub fn is_bottom_half(&self, z: f64) -> bool {
        z < 0.5 * (self.z_top + self.z_bottom)
    }
}

/// Marks undercoordinated carbons as surface and saturated ones as bulk.
pub(crate) fn retag_surface(s: &mut Structure) {
    let coord = coordination(s);
    for (a, c) in s.atoms.iter_mut().zip(coord) {
        if a.species == Element::C && matches!(a.role, Role::Bulk | Role::Surface) {
            a.role = if c < 4 { Role::Surface } else { Role::Bulk };
        }
    }
}

/// Cuts a single-layer step into a flat (100) slab.
///
/// Top-layer rows `upper_terrace_width..n` along x are removed, together with
/// the second- and third-layer rows at the foot of the step, which opens a
/// trench bounded by a (111) wall.
pub fn carve_chadi_step(
    slab: &Structure,
    step_axis: StepAxis,
    upper_terrace_width: usize,
) -> Result<Structure> {
    if step_axis == StepAxis::X {
        return Err(Error::InvalidInput(
            "step edges along x are not supported; the edge must run along y".into(),
        ));
    }
    if upper_terrace_width == 0 {
        return Ok(slab.clone());
    }
    let adj = neighbor_list(slab);
    let frame = SlabFrame::from_structure(slab, &adj)?;
    let v = slab.cell.vectors;
    if v[0][1].abs() > 1e-9 || v[0][2].abs() > 1e-9 || v[1][0].abs() > 1e-9 || v[1][2].abs() > 1e-9
    {
        return Err(Error::Geometry("in-plane cell must be aligned with x and y".into()));
    }
    let lx = v[0][0];
    let n = (lx / frame.side).round() as usize;
    if n == 0 || (n as f64 * frame.side - lx).abs() > 1e-6 {
        return Err(Error::Geometry("cell is not a whole number of (1×1) rows".into()));
    }
    let top: Vec<usize> = (0..slab.len())
        .filter(|&i| slab.atoms[i].species == Element::C && frame.layer(slab.atoms[i].position[2]) == 0)
        .collect();
    for &i in &top {
        let flat = adj.degree(i) == 2
            && adj.neighbors(i).iter().all(|nb| {
                (nb.vector.x.abs() - frame.side / 2.0).abs() < 1e-6 && nb.vector.y.abs() < 1e-6
            });
        if !flat {
            return Err(Error::Geometry(format!(
                "atom {i} is not part of a flat (100) top layer with back-bonds along x"
            )));
        }
    }
    let w = upper_terrace_width;
    if w < 2 || n < w + 2 {
        return Err(Error::Geometry(format!(
            "terrace too narrow: {n} rows cannot hold an upper terrace of {w} rows and a lower terrace of at least 2"
        )));
    }
    let x0 = slab.atoms[top[0]].position[0].rem_euclid(frame.side);
    let row = |x: f64, offset: f64| -> usize {
        (((x - x0) / frame.side - offset).round() as i64).rem_euclid(n as i64) as usize
    };
    let atoms: Vec<Atom> = slab
        .atoms
        .iter()
        .filter(|a| {
            if a.species != Element::C {
                return true;
            }
            match frame.layer(a.position[2]) {
                0 => row(a.position[0], 0.0) < w,
                1 | 2 => row(a.position[0], 0.5) != w,
                _ => true,
            }
        })
        .cloned()
        .collect();
    let mut out = Structure::new(slab.cell.clone(), atoms, slab.bond_cutoff)?;
    retag_surface(&mut out);
    Ok(out)
}

struct Flip {
    position: Vector3<f64>,
    host: usize,
}

fn flip_candidate(s: &Structure, adj: &Adjacency, site: usize) -> Option<Flip> {
    let atom = &s.atoms[site];
    if atom.species != Element::C || atom.role.is_terminator() || adj.degree(site) != 4 {
        return None;
    }
    let carbons_only = adj
        .neighbors(site)
        .iter()
        .all(|n| s.atoms[n.index].species == Element::C);
    let at_edge = adj.neighbors(site).iter().any(|n| adj.degree(n.index) < 4);
    if !carbons_only || !at_edge {
        return None;
    }
    let p = atom.pos();
    for dropped in adj.neighbors(site) {
        if dropped.vector.z >= -1e-6 {
            continue;
        }
        let q = p - dropped.vector * (2.0 / 3.0);
        let kept: Vec<Vector3<f64>> = adj
            .neighbors(site)
            .iter()
            .filter(|n| !std::ptr::eq(*n, dropped))
            .map(|n| p + n.vector - q)
            .collect();
        let db = -kept.iter().map(|b| b.normalize()).sum::<Vector3<f64>>().normalize();
        if db.z <= 0.0 {
            continue;
        }
        let cap = q + db * BOND_CO;
        let mut bonded = 0;
        let mut clear = true;
        for (k, other) in s.atoms.iter().enumerate() {
            if k == site {
                continue;
            }
            let d = s.cell.minimum_image(&(other.pos() - q)).norm();
            if d < s.bond_cutoff {
                bonded += 1;
            } else if d < FLIP_CLEARANCE {
                clear = false;
            }
            if s.cell.minimum_image(&(other.pos() - cap)).norm() < FLIP_CLEARANCE {
                clear = false;
            }
        }
        if clear && bonded == 3 {
            return Some(Flip {
                position: q,
                host: dropped.index,
            });
        }
    }
    None
}

/// Carbons that [`raise_trench_carbon`] accepts, in atom order.
pub fn trench_sites(s: &Structure) -> Vec<usize> {
    let adj = neighbor_list(s);
    (0..s.len())
        .filter(|&i| flip_candidate(s, &adj, i).is_some())
        .collect()
}

/// Flips a trench-wall carbon through the plane of three of its neighbours
/// onto the adjacent (111) adlayer site, leaving one dangling bond on the
/// flipped carbon and one on the carbon it let go of.
pub fn raise_trench_carbon(slab: &Structure, site: usize) -> Result<Structure> {
    if site >= slab.len() {
        return Err(Error::InvalidSite {
            index: site,
            reason: format!("structure has {} atoms", slab.len()),
        });
    }
    let adj = neighbor_list(slab);
    let flip = flip_candidate(slab, &adj, site).ok_or_else(|| Error::InvalidSite {
        index: site,
        reason: "not a trench-edge carbon with room to flip onto a (111) adlayer site".into(),
    })?;
    let mut atoms = slab.atoms.clone();
    atoms[site] = Atom::new(Element::C, flip.position, Role::FloatingC);
    atoms[flip.host].role = Role::DbHost;
    let mut out = Structure::new(slab.cell.clone(), atoms, slab.bond_cutoff)?;
    retag_surface(&mut out);
    Ok(out)
}

/// Number of layer spacings between an atom and the highest carbon within
/// `radius` Å laterally.
pub fn depth_below_local_surface(s: &Structure, atom: usize, radius: f64) -> Result<usize> {
    if atom >= s.len() {
        return Err(Error::InvalidInput(format!("atom {atom} out of range")));
    }
    let adj = neighbor_list(s);
    let frame = SlabFrame::from_structure(s, &adj)?;
    let p = s.position(atom);
    let z_surf = s
        .atoms
        .iter()
        .filter(|a| a.species == Element::C && a.role != Role::FloatingC)
        .filter(|a| {
            let mut d = s.cell.minimum_image(&(a.pos() - p));
            d.z = 0.0;
            d.norm() <= radius
        })
        .map(|a| a.position[2])
        .fold(p.z, f64::max);
    Ok(((z_surf - p.z) / frame.spacing).round().max(0.0) as usize)
}
