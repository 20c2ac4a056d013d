use super::{neighbor_list, Element, Structure};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Number of bonds a fully saturated atom of this species forms.
pub fn valence(e: Element) -> usize {
    match e {
        Element::C => 4,
        Element::O => 2,
        Element::H => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbEntry {
    pub atom: usize,
    pub db_count: usize,
    /// Unit vector along the (mean) missing bond.
    pub direction: Option<[f64; 3]>,
}

/// Undercoordinated atoms, in atom order. Saturated atoms are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DbReport {
    pub entries: Vec<DbEntry>,
}

impl DbReport {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.db_count).sum()
    }

    pub fn count_of(&self, atom: usize) -> usize {
        self.entries
            .iter()
            .find(|e| e.atom == atom)
            .map_or(0, |e| e.db_count)
    }
}

pub fn coordination(s: &Structure) -> Vec<usize> {
    let adj = neighbor_list(s);
    (0..s.len()).map(|i| adj.degree(i)).collect()
}

pub fn enumerate_dbs(s: &Structure) -> DbReport {
    let adj = neighbor_list(s);
    let entries = (0..s.len())
        .filter_map(|i| {
            let db = valence(s.atoms[i].species).saturating_sub(adj.degree(i));
            if db == 0 {
                return None;
            }
            let sum: Vector3<f64> = adj.neighbors(i).iter().map(|n| n.vector / n.distance).sum();
            let dir = if sum.norm() > 1e-9 {
                -sum.normalize()
            } else {
                Vector3::z()
            };
            Some(DbEntry {
                atom: i,
                db_count: db,
                direction: Some([dir.x, dir.y, dir.z]),
            })
        })
        .collect();
    DbReport { entries }
}

/// Completes a tetrahedron around the given unit bond vectors and returns the
/// missing directions.
pub fn missing_bond_directions(bonds: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let cos_half = ((-1.0f64 / 3.0).acos() / 2.0).cos();
    let sin_half = ((-1.0f64 / 3.0).acos() / 2.0).sin();
    match bonds {
        [] => vec![
            Vector3::new(1.0, 1.0, 1.0).normalize(),
            Vector3::new(1.0, -1.0, -1.0).normalize(),
            Vector3::new(-1.0, 1.0, -1.0).normalize(),
            Vector3::new(-1.0, -1.0, 1.0).normalize(),
        ],
        [b] => {
            let b = b.normalize();
            let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
            let reference = axes
                .iter()
                .min_by(|p, q| b.dot(p).abs().total_cmp(&b.dot(q).abs()))
                .copied()
                .unwrap();
            let e1 = (reference - b * b.dot(&reference)).normalize();
            let e2 = b.cross(&e1);
            let radial = (8.0f64).sqrt() / 3.0;
            (0..3)
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                    -b / 3.0 + (e1 * phi.cos() + e2 * phi.sin()) * radial
                })
                .collect()
        }
        [b1, b2] => {
            let (b1, b2) = (b1.normalize(), b2.normalize());
            let bisector = -(b1 + b2).normalize();
            let normal = b1.cross(&b2).normalize();
            vec![
                bisector * cos_half + normal * sin_half,
                bisector * cos_half - normal * sin_half,
            ]
        }
        [b1, b2, b3] => vec![-(b1.normalize() + b2.normalize() + b3.normalize()).normalize()],
        _ => Vec::new(),
    }
}
