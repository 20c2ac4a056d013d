//! Point-dipole hyperfine tensors, secular couplings and their inversion to
//! electron–nucleus geometry.

use crate::constants::{electron_dipolar_factor, GAMMA_13C_MHZ_PER_T, GAMMA_1H_MHZ_PER_T};
use crate::crystal::{enumerate_dbs, Element, Role, Structure};
use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotopeSpec {
    pub symbol: String,
    pub spin: f64,
    pub gamma_mhz_per_t: f64,
    /// C_n in MHz·Å³.
    pub dipolar_prefactor: f64,
}

impl IsotopeSpec {
    pub fn new(symbol: &str, spin: f64, gamma_mhz_per_t: f64) -> Self {
        IsotopeSpec {
            symbol: symbol.to_string(),
            spin,
            gamma_mhz_per_t,
            dipolar_prefactor: electron_dipolar_factor() * gamma_mhz_per_t,
        }
    }

    pub fn h1() -> Self {
        IsotopeSpec::new("1H", 0.5, GAMMA_1H_MHZ_PER_T)
    }

    pub fn c13() -> Self {
        IsotopeSpec::new("13C", 0.5, GAMMA_13C_MHZ_PER_T)
    }

    pub fn from_symbol(symbol: &str) -> Result<Self> {
        match symbol {
            "1H" | "H" => Ok(IsotopeSpec::h1()),
            "13C" | "C" => Ok(IsotopeSpec::c13()),
            other => Err(Error::InvalidInput(format!("unknown isotope `{other}`"))),
        }
    }

    /// Spin-1/2 isotope scanned for an element, if any.
    pub fn for_element(e: Element) -> Option<Self> {
        match e {
            Element::H => Some(IsotopeSpec::h1()),
            Element::C => Some(IsotopeSpec::c13()),
            Element::O => None,
        }
    }
}

/// Electron spin density as weighted point populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinCenter {
    sites: Vec<([f64; 3], f64)>,
}

impl SpinCenter {
    pub fn new(sites: Vec<([f64; 3], f64)>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("spin center needs at least one site".into()));
        }
        if sites.iter().any(|(p, w)| !(*w >= 0.0) || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("populations must be non-negative and finite".into()));
        }
        let total: f64 = sites.iter().map(|s| s.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "populations must sum to 1, got {total}"
            )));
        }
        Ok(SpinCenter { sites })
    }

    pub fn single(position: Vector3<f64>) -> Self {
        SpinCenter {
            sites: vec![([position.x, position.y, position.z], 1.0)],
        }
    }

    /// Point spin displaced `offset` Å from the host carbon along its dangling bond.
    pub fn dangling_bond_lobe(s: &Structure, host: usize, offset: f64) -> Result<Self> {
        let entry = enumerate_dbs(s)
            .entries
            .into_iter()
            .find(|e| e.atom == host)
            .ok_or_else(|| Error::InvalidInput(format!("atom {host} has no dangling bond")))?;
        let m = Vector3::from(entry.direction.expect("dangling bond has a direction"));
        Ok(SpinCenter::single(s.position(host) + m * offset))
    }

    pub fn sites(&self) -> impl Iterator<Item = (Vector3<f64>, f64)> + '_ {
        self.sites.iter().map(|(p, w)| (Vector3::from(*p), *w))
    }

    pub fn transformed(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Self {
        SpinCenter {
            sites: self
                .sites()
                .map(|(p, w)| {
                    let q = f(p);
                    ([q.x, q.y, q.z], w)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineTensor {
    /// Full coupling matrix, MHz.
    pub a: Matrix3<f64>,
    pub a_iso: f64,
}

impl HyperfineTensor {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let sym = (self.a + self.a.transpose()) * 0.5;
        let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|x, y| y.total_cmp(x));
        [e[0], e[1], e[2]]
    }

    pub fn dipolar_part(&self) -> Matrix3<f64> {
        self.a - Matrix3::identity() * self.a_iso
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularPair {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySolution {
    pub r: f64,
    pub theta: f64,
    pub residual: f64,
}

/// Closest a nucleus may sit to a spin site, Å.
const MIN_SITE_DISTANCE: f64 = 0.1;

fn dipolar_from_displacements(
    displacements: impl Iterator<Item = (Vector3<f64>, f64)>,
    isotope: &IsotopeSpec,
) -> Result<Matrix3<f64>> {
    let mut t = Matrix3::zeros();
    for (r, p) in displacements {
        let d = r.norm();
        if !(d > MIN_SITE_DISTANCE) {
            return Err(Error::Singularity(format!(
                "nucleus lies {d:.3} Å from a spin site"
            )));
        }
        let u = r / d;
        t += (u * u.transpose() * 3.0 - Matrix3::identity()) * (p * isotope.dipolar_prefactor / (d * d * d));
    }
    Ok(t)
}

/// Population-weighted point-dipole tensor at `nucleus`, MHz.
pub fn dipolar_tensor(
    center: &SpinCenter,
    nucleus: Vector3<f64>,
    isotope: &IsotopeSpec,
) -> Result<Matrix3<f64>> {
    dipolar_from_displacements(center.sites().map(|(p, w)| (nucleus - p, w)), isotope)
}

pub fn total_tensor(dip: &Matrix3<f64>, a_iso: f64) -> HyperfineTensor {
    HyperfineTensor {
        a: dip + Matrix3::identity() * a_iso,
        a_iso,
    }
}

/// (A_ZZ, |A_Z⊥|) in a frame whose z axis is the field direction.
pub fn secular_couplings(t: &HyperfineTensor, field_dir: Vector3<f64>) -> Result<SecularPair> {
    let n = field_dir.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("field direction must be a non-zero vector".into()));
    }
    let z = field_dir / n;
    let column = t.a * z;
    let a = z.dot(&column);
    let b = (column - z * a).norm();
    Ok(SecularPair { a, b })
}

/// Closed-form (a, b) for a single point spin at distance `r` and polar angle
/// `theta_deg` from the field.
pub fn forward_ab(r: f64, theta_deg: f64, a_iso: f64, isotope: &IsotopeSpec) -> SecularPair {
    let t = isotope.dipolar_prefactor / (r * r * r);
    let (s, c) = theta_deg.to_radians().sin_cos();
    SecularPair {
        a: a_iso + t * (3.0 * c * c - 1.0),
        b: (3.0 * t * s * c).abs(),
    }
}

fn residual(r: f64, theta_deg: f64, a: f64, b: f64, a_iso: f64, iso: &IsotopeSpec) -> f64 {
    let f = forward_ab(r, theta_deg, a_iso, iso);
    (f.a - a).abs().max((f.b - b).abs())
}

/// Newton refinement of (r, θ) against the forward model.
fn polish(mut r: f64, mut theta: f64, a: f64, b: f64, a_iso: f64, iso: &IsotopeSpec) -> (f64, f64) {
    let mut best = residual(r, theta, a, b, a_iso, iso);
    for _ in 0..8 {
        if best == 0.0 {
            break;
        }
        let f = forward_ab(r, theta, a_iso, iso);
        let t = iso.dipolar_prefactor / (r * r * r);
        let (s, c) = theta.to_radians().sin_cos();
        let j11 = -3.0 / r * (f.a - a_iso);
        let j12 = -6.0 * t * s * c;
        let j21 = -3.0 / r * f.b;
        let j22 = 3.0 * t * (c * c - s * s);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            break;
        }
        let (fa, fb) = (f.a - a, f.b - b);
        let dr = (j22 * fa - j12 * fb) / det;
        let dt = (j11 * fb - j21 * fa) / det;
        let (nr, nt) = (r - dr, (theta.to_radians() - dt).to_degrees().clamp(0.0, 90.0));
        if !(nr > 0.0) {
            break;
        }
        let res = residual(nr, nt, a, b, a_iso, iso);
        if res >= best {
            break;
        }
        r = nr;
        theta = nt;
        best = res;
    }
    (r, theta)
}

/// All (r, θ) with θ ∈ [0°, 90°] reproducing the secular pair, best first.
///
/// For b > 0 the angular condition is b·t² + 3(a − a_iso)·t − 2b = 0 with
/// t = tan θ, which has exactly one positive root.
pub fn fit_geometry(
    a: f64,
    b: f64,
    a_iso: f64,
    isotope: &IsotopeSpec,
) -> Result<Vec<GeometrySolution>> {
    if !(b >= 0.0) || !a.is_finite() || !b.is_finite() || !a_iso.is_finite() {
        return Err(Error::InvalidInput("need finite a, a_iso and b ≥ 0".into()));
    }
    let delta = a - a_iso;
    let c_n = isotope.dipolar_prefactor;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    if b > 0.0 {
        let disc = (9.0 * delta * delta + 8.0 * b * b).sqrt();
        let t = if delta >= 0.0 {
            4.0 * b / (3.0 * delta + disc)
        } else {
            (disc - 3.0 * delta) / (2.0 * b)
        };
        let theta = t.atan();
        let (s, c) = theta.sin_cos();
        let coupling = b / (3.0 * s * c);
        if coupling > 0.0 && coupling.is_finite() {
            raw.push(((c_n / coupling).cbrt(), theta.to_degrees()));
        }
    } else if delta > 0.0 {
        raw.push(((c_n / (delta / 2.0)).cbrt(), 0.0));
    } else if delta < 0.0 {
        raw.push(((c_n / -delta).cbrt(), 90.0));
    }
    let mut out: Vec<GeometrySolution> = raw
        .into_iter()
        .map(|(r, th)| {
            let (r, th) = polish(r, th, a, b, a_iso, isotope);
            GeometrySolution {
                r,
                theta: th,
                residual: residual(r, th, a, b, a_iso, isotope),
            }
        })
        .collect();
    out.sort_by(|x, y| x.residual.total_cmp(&y.residual).then(x.r.total_cmp(&y.r)));
    Ok(out)
}

/// Which nuclei receive a non-zero Fermi-contact term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AtomSelector {
    /// Atom by index.
    Index(usize),
    /// The carbon carrying the dangling bond.
    DbHost,
    /// Hydrogen of the hydroxyl capping the floating carbon.
    FloatingOhHydrogen,
}

impl TryFrom<String> for AtomSelector {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        match s.as_str() {
            "db-host" => Ok(AtomSelector::DbHost),
            "floating-oh-hydrogen" => Ok(AtomSelector::FloatingOhHydrogen),
            other => other
                .strip_prefix("index:")
                .and_then(|n| n.parse().ok())
                .map(AtomSelector::Index)
                .ok_or_else(|| Error::InvalidInput(format!("unknown atom selector `{other}`"))),
        }
    }
}

impl From<AtomSelector> for String {
    fn from(s: AtomSelector) -> String {
        match s {
            AtomSelector::Index(i) => format!("index:{i}"),
            AtomSelector::DbHost => "db-host".into(),
            AtomSelector::FloatingOhHydrogen => "floating-oh-hydrogen".into(),
        }
    }
}

impl AtomSelector {
    pub fn resolve(&self, s: &Structure) -> Vec<usize> {
        match self {
            AtomSelector::Index(i) => {
                if *i < s.len() {
                    vec![*i]
                } else {
                    Vec::new()
                }
            }
            AtomSelector::DbHost => s.indices_with_role(Role::DbHost),
            AtomSelector::FloatingOhHydrogen => {
                let adj = crate::crystal::neighbor_list(s);
                let floating = s.indices_with_role(Role::FloatingC);
                (0..s.len())
                    .filter(|&h| s.atoms[h].species == Element::H && s.atoms[h].role == Role::TerminatorOh)
                    .filter(|&h| {
                        adj.neighbors(h).iter().any(|o| {
                            s.atoms[o.index].species == Element::O
                                && adj
                                    .neighbors(o.index)
                                    .iter()
                                    .any(|c| floating.contains(&c.index))
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Fermi-contact values keyed by atom index, MHz; unlisted atoms are 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AisoTable(pub BTreeMap<usize, f64>);

impl AisoTable {
    pub fn get(&self, atom: usize) -> f64 {
        self.0.get(&atom).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureEntry {
    pub selector: AtomSelector,
    pub isotope: String,
    pub a_iso: f64,
    /// Published (a, b) pairs for this nucleus, MHz.
    #[serde(default)]
    pub reported_ab: Vec<[f64; 2]>,
}

/// Fermi-contact fixture together with the spin-center geometry it assumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AisoFixture {
    pub name: String,
    pub lobe_offset: f64,
    pub field_direction: [f64; 3],
    pub entries: Vec<FixtureEntry>,
}

const PAPER_FIXTURE: &str = include_str!("../fixtures/paper_fixture.toml");

impl AisoFixture {
    pub fn paper() -> Self {
        AisoFixture::from_toml(PAPER_FIXTURE).expect("bundled fixture parses")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| crate::cli_io::toml_error(text, &e))
    }

    /// Per-atom table for a structure; every selector must match something.
    pub fn table(&self, s: &Structure) -> Result<AisoTable> {
        let mut table = AisoTable::default();
        for entry in &self.entries {
            let atoms = entry.selector.resolve(s);
            if atoms.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "fixture selector `{}` matches no atom",
                    String::from(entry.selector.clone())
                )));
            }
            for i in atoms {
                table.0.insert(i, entry.a_iso);
            }
        }
        Ok(table)
    }

    pub fn spin_center(&self, s: &Structure) -> Result<SpinCenter> {
        let host = *s
            .indices_with_role(Role::DbHost)
            .first()
            .ok_or_else(|| Error::InvalidInput("structure has no db-host atom".into()))?;
        SpinCenter::dangling_bond_lobe(s, host, self.lobe_offset)
    }

    pub fn field(&self) -> Vector3<f64> {
        Vector3::from(self.field_direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub atom_index: usize,
    pub element: Element,
    pub isotope: String,
    pub a: f64,
    pub b: f64,
    pub flagged: bool,
}

/// Secular couplings of every ¹H and ¹³C nucleus in the structure.
pub fn scan_structure(
    s: &Structure,
    center: &SpinCenter,
    field_dir: Vector3<f64>,
    a_iso: &AisoTable,
    threshold: f64,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for (i, atom) in s.atoms.iter().enumerate() {
        let Some(iso) = IsotopeSpec::for_element(atom.species) else {
            continue;
        };
        let nucleus = atom.pos();
        let dip = dipolar_from_displacements(
            center
                .sites()
                .map(|(p, w)| (s.cell.minimum_image(&(nucleus - p)), w)),
            &iso,
        )?;
        let pair = secular_couplings(&total_tensor(&dip, a_iso.get(i)), field_dir)?;
        rows.push(ScanRow {
            atom_index: i,
            element: atom.species,
            isotope: iso.symbol,
            a: pair.a,
            b: pair.b,
            flagged: pair.a.abs().max(pair.b) >= threshold,
        });
    }
    Ok(rows)
}
