use super::step::SlabFrame;
use super::{
    missing_bond_directions, neighbor_list, valence, Atom, Element, Role, Structure, BOND_CH,
    BOND_CO, BOND_OH,
};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Terminator {
    H,
    #[serde(rename = "O-bridge")]
    OBridge,
    OH,
    #[serde(rename = "none")]
    None,
}

impl FromStr for Terminator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Terminator::H),
            "O-bridge" => Ok(Terminator::OBridge),
            "OH" => Ok(Terminator::OH),
            "none" => Ok(Terminator::None),
            other => Err(Error::InvalidInput(format!("unknown terminator `{other}`"))),
        }
    }
}

/// Environment of a vacant bonding site next to one or two dangling bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteClass {
    /// Shared site above the top carbon layer.
    UpperTerrace,
    /// Shared site one layer below the top.
    LowerTerrace,
    /// Lone dangling bond at a step riser or trench rim.
    StepEdge,
    /// Shared site deeper in the trench at the step foot.
    Trench,
    /// Trench site next to the floating carbon.
    StepBridge,
    /// Lone dangling bond on a carbon bonded to the floating carbon.
    TrenchPair,
    FloatingC,
    DbHost,
    /// Lower half of the slab.
    Bottom,
}

impl SiteClass {
    pub const ALL: [SiteClass; 9] = [
        SiteClass::UpperTerrace,
        SiteClass::LowerTerrace,
        SiteClass::StepEdge,
        SiteClass::Trench,
        SiteClass::StepBridge,
        SiteClass::TrenchPair,
        SiteClass::FloatingC,
        SiteClass::DbHost,
        SiteClass::Bottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SiteClass::UpperTerrace => "upper-terrace",
            SiteClass::LowerTerrace => "lower-terrace",
            SiteClass::StepEdge => "step-edge",
            SiteClass::Trench => "trench",
            SiteClass::StepBridge => "step-bridge",
            SiteClass::TrenchPair => "trench-pair",
            SiteClass::FloatingC => "floating-c",
            SiteClass::DbHost => "db-host",
            SiteClass::Bottom => "bottom",
        }
    }
}

impl fmt::Display for SiteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SiteClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SiteClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown site class `{s}`")))
    }
}

/// Terminator choices at the step edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EdgeVariant {
    /// Bridge O at the step, H on the two trench carbons.
    #[default]
    #[serde(rename = "O/H/H")]
    OHH,
    /// Bridge O at the step, OH on the two trench carbons.
    #[serde(rename = "O/OH/OH")]
    OOHOH,
    /// OH on the two trench carbons, no bridging O.
    #[serde(rename = "OH/OH")]
    OHOH,
}

impl EdgeVariant {
    pub fn label(self) -> &'static str {
        match self {
            EdgeVariant::OHH => "O/H/H",
            EdgeVariant::OOHOH => "O/OH/OH",
            EdgeVariant::OHOH => "OH/OH",
        }
    }
}

impl FromStr for EdgeVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [EdgeVariant::OHH, EdgeVariant::OOHOH, EdgeVariant::OHOH]
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown edge variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TerminationRules(pub BTreeMap<SiteClass, Terminator>);

impl TerminationRules {
    /// Same terminator for every class.
    pub fn uniform(t: Terminator) -> Self {
        TerminationRules(SiteClass::ALL.into_iter().map(|c| (c, t)).collect())
    }

    /// Bridging O wherever two dangling bonds meet, H elsewhere, OH on the
    /// floating carbon and the host left open.
    pub fn paper(variant: EdgeVariant) -> Self {
        use SiteClass::*;
        use Terminator as T;
        let (bridge, pair) = match variant {
            EdgeVariant::OHH => (T::OBridge, T::H),
            EdgeVariant::OOHOH => (T::OBridge, T::OH),
            EdgeVariant::OHOH => (T::H, T::OH),
        };
        TerminationRules(BTreeMap::from([
            (UpperTerrace, T::OBridge),
            (LowerTerrace, T::OBridge),
            (StepEdge, T::H),
            (Trench, T::OBridge),
            (StepBridge, bridge),
            (TrenchPair, pair),
            (FloatingC, T::OH),
            (DbHost, T::None),
            (Bottom, T::H),
        ]))
    }

    pub fn with(mut self, class: SiteClass, t: Terminator) -> Self {
        self.0.insert(class, t);
        self
    }

    pub fn get(&self, class: SiteClass) -> Option<Terminator> {
        self.0.get(&class).copied()
    }
}

/// A vacant bonding site and the dangling bonds pointing at it.
#[derive(Debug, Clone, PartialEq)]
pub struct VacantSite {
    pub class: SiteClass,
    /// (atom index, unit direction of the missing bond)
    pub bonds: Vec<(usize, Vector3<f64>)>,
}

/// Groups every carbon dangling bond by the lattice site it points at.
pub fn classify_sites(s: &Structure) -> Result<Vec<VacantSite>> {
    let adj = neighbor_list(s);
    let frame = SlabFrame::from_structure(s, &adj)?;
    let bond_len = frame.spacing * 3f64.sqrt();
    let floating: Vec<usize> = s.indices_with_role(Role::FloatingC);

    // (atom, missing direction, depth, bottom half, bonded to floating C)
    let mut dangling = Vec::new();
    for (i, atom) in s.atoms.iter().enumerate() {
        if atom.species != Element::C {
            continue;
        }
        let bonds: Vec<Vector3<f64>> = adj.neighbors(i).iter().map(|n| n.vector / n.distance).collect();
        if bonds.len() >= valence(Element::C) {
            continue;
        }
        let z = atom.position[2];
        let touches_floating = adj.neighbors(i).iter().any(|n| floating.contains(&n.index));
        for m in missing_bond_directions(&bonds) {
            dangling.push((i, m, frame.layer(z), frame.is_bottom_half(z), touches_floating));
        }
    }

    let mut groups: Vec<(Vector3<f64>, Vec<usize>)> = Vec::new();
    for (k, (i, m, ..)) in dangling.iter().enumerate() {
        let target = s.position(*i) + m * bond_len;
        match groups
            .iter_mut()
            .find(|(t, _)| s.cell.minimum_image(&(target - t)).norm() < 0.3)
        {
            Some((_, members)) => members.push(k),
            None => groups.push((target, vec![k])),
        }
    }

    let sites = groups
        .into_iter()
        .map(|(target, members)| {
            let role_of = |k: usize| s.atoms[dangling[k].0].role;
            let paired = members.len() >= 2;
            let class = if members.iter().any(|&k| role_of(k) == Role::FloatingC) {
                SiteClass::FloatingC
            } else if members.iter().any(|&k| role_of(k) == Role::DbHost) {
                SiteClass::DbHost
            } else if members.iter().all(|&k| dangling[k].3) {
                SiteClass::Bottom
            } else if paired {
                let depth = members.iter().map(|&k| dangling[k].2).min().unwrap_or(0);
                let near_floating = floating
                    .iter()
                    .any(|&f| s.cell.minimum_image(&(s.position(f) - target)).norm() < 2.0);
                match depth {
                    0 => SiteClass::UpperTerrace,
                    1 => SiteClass::LowerTerrace,
                    _ if near_floating => SiteClass::StepBridge,
                    _ => SiteClass::Trench,
                }
            } else if dangling[members[0]].4 {
                SiteClass::TrenchPair
            } else {
                SiteClass::StepEdge
            };
            VacantSite {
                class,
                bonds: members.iter().map(|&k| (dangling[k].0, dangling[k].1)).collect(),
            }
        })
        .collect();
    Ok(sites)
}

/// Caps dangling bonds according to `rules`, keyed by site class.
pub fn terminate(slab: &Structure, rules: &TerminationRules) -> Result<Structure> {
    let sites = classify_sites(slab)?;
    let mut added: Vec<Atom> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for site in &sites {
        let first = site.bonds[0].0;
        let rule = rules
            .get(site.class)
            .ok_or_else(|| Error::IncompleteTermination {
                class: site.class.name().into(),
                atom: first,
            })?;
        if site.bonds.len() > 2 {
            return Err(Error::TerminationConflict {
                atom: first,
                reason: format!("{} dangling bonds share one vacant site", site.bonds.len()),
            });
        }
        let paired = site.bonds.len() == 2;
        match rule {
            Terminator::None => open.extend(site.bonds.iter().map(|b| b.0)),
            Terminator::H => {
                for &(i, m) in &site.bonds {
                    added.push(Atom::new(Element::H, slab.position(i) + m * BOND_CH, Role::TerminatorH));
                }
            }
            Terminator::OH => {
                if paired {
                    return Err(Error::TerminationConflict {
                        atom: first,
                        reason: format!("OH requested on a shared {} site", site.class),
                    });
                }
                let o = slab.position(first) + site.bonds[0].1 * BOND_CO;
                added.push(Atom::new(Element::O, o, Role::TerminatorOh));
                added.push(Atom::new(Element::H, o + site.bonds[0].1 * BOND_OH, Role::TerminatorOh));
            }
            Terminator::OBridge => {
                if !paired {
                    return Err(Error::TerminationConflict {
                        atom: first,
                        reason: format!("bridging O requested on a lone {} dangling bond", site.class),
                    });
                }
                let (i, m1) = site.bonds[0];
                let (j, m2) = site.bonds[1];
                let p1 = slab.position(i);
                let p2 = p1 + slab.displacement(i, j);
                let half = (p2 - p1).norm() / 2.0;
                if half >= BOND_CO {
                    return Err(Error::Geometry(format!(
                        "atoms {i} and {j} are too far apart to share a bridging O"
                    )));
                }
                let up = (m1 + m2).normalize();
                let o = (p1 + p2) / 2.0 + up * (BOND_CO * BOND_CO - half * half).sqrt();
                added.push(Atom::new(Element::O, o, Role::TerminatorOBridge));
            }
        }
    }
    let mut atoms = slab.atoms.clone();
    atoms.extend(added);
    let out = Structure::new(slab.cell.clone(), atoms, slab.bond_cutoff)?;

    let adj = neighbor_list(&out);
    for (i, atom) in out.atoms.iter().enumerate() {
        let v = valence(atom.species);
        let c = adj.degree(i);
        if c > v {
            return Err(Error::Geometry(format!(
                "atom {i} ({}) is over-coordinated after termination ({c} > {v})",
                atom.species
            )));
        }
        if c < v && !open.contains(&i) {
            return Err(Error::Geometry(format!(
                "atom {i} ({}) is still unsaturated after termination",
                atom.species
            )));
        }
    }
    Ok(out)
}
