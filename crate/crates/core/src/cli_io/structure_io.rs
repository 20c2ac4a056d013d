use super::toml_error;
use crate::crystal::{Atom, Cell, Element, Role, Structure};
use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;

const FORMAT_TAG: &str = "surfspin-structure";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureFormat {
    Xyz,
    Interchange,
}

impl StructureFormat {
    /// `.xyz` files are XYZ; everything else is the interchange format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("xyz") => StructureFormat::Xyz,
            _ => StructureFormat::Interchange,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    bond_cutoff: f64,
    cell: Cell,
    atoms: Vec<Atom>,
}

pub fn emit_interchange(s: &Structure) -> Result<String> {
    let doc = Document {
        format: FORMAT_TAG.into(),
        version: 1,
        bond_cutoff: s.bond_cutoff,
        cell: s.cell.clone(),
        atoms: s.atoms.clone(),
    };
    toml::to_string(&doc).map_err(|e| Error::InvalidInput(format!("cannot serialize structure: {e}")))
}

fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.starts_with(key) && l[key.len()..].trim_start().starts_with(['=', ']'])
                || l.trim_start_matches('[').starts_with(key)
        })
        .map_or(0, |i| i + 1)
}

pub fn parse_interchange(text: &str) -> Result<Structure> {
    let doc: Document = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    let semantic = |field: &str, message: String| Error::Parse {
        line: line_of(text, field.rsplit('.').next().unwrap_or(field)),
        field: field.into(),
        message,
    };
    if doc.format != FORMAT_TAG {
        return Err(semantic("format", format!("expected `{FORMAT_TAG}`")));
    }
    if doc.version != 1 {
        return Err(semantic("version", format!("unsupported version {}", doc.version)));
    }
    let cell = Cell::new(doc.cell.vectors, doc.cell.periodic)
        .map_err(|e| semantic("cell.vectors", e.to_string()))?;
    Structure::new(cell, doc.atoms, doc.bond_cutoff).map_err(|e| match e {
        Error::InvalidInput(m) => semantic("bond_cutoff", m),
        other => other,
    })
}

fn fmt6(x: f64) -> String {
    // Avoid "-0.000000" so that equal geometries give equal bytes.
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn emit_xyz(s: &Structure) -> String {
    let v = s.cell.vectors;
    let lattice: Vec<String> = v.iter().flatten().map(|x| fmt6(*x)).collect();
    let pbc: Vec<&str> = s.cell.periodic.iter().map(|&p| if p { "T" } else { "F" }).collect();
    let mut out = format!(
        "{}\nLattice=\"{}\" pbc=\"{}\"\n",
        s.len(),
        lattice.join(" "),
        pbc.join(" ")
    );
    for a in &s.atoms {
        out.push_str(&format!(
            "{} {} {} {}\n",
            a.species,
            fmt6(a.position[0]),
            fmt6(a.position[1]),
            fmt6(a.position[2])
        ));
    }
    out
}

fn quoted_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let start = line.find(&format!("{key}="))? + key.len() + 1;
    let rest = &line[start..];
    if let Some(body) = rest.strip_prefix('"') {
        body.find('"').map(|end| &body[..end])
    } else {
        Some(rest.split_whitespace().next().unwrap_or(""))
    }
}

/// Reads XYZ with a `Lattice=` comment. Roles are not stored in XYZ: carbons
/// come back as bulk, hydrogens as H terminators and oxygens as bridging O.
pub fn parse_xyz(text: &str) -> Result<Structure> {
    let err = |line: usize, field: &str, message: String| Error::Parse {
        line,
        field: field.into(),
        message,
    };
    let lines: Vec<&str> = text.lines().collect();
    let count: usize = lines
        .first()
        .ok_or_else(|| err(1, "atom_count", "file is empty".into()))?
        .trim()
        .parse()
        .map_err(|e| err(1, "atom_count", format!("{e}")))?;
    let comment = lines
        .get(1)
        .ok_or_else(|| err(2, "Lattice", "missing comment line".into()))?;
    let lattice = quoted_value(comment, "Lattice")
        .ok_or_else(|| err(2, "Lattice", "comment line has no Lattice= entry".into()))?;
    let numbers: Vec<f64> = lattice
        .split_whitespace()
        .map(|x| x.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(2, "Lattice", format!("{e}")))?;
    if numbers.len() != 9 {
        return Err(err(2, "Lattice", format!("expected 9 numbers, found {}", numbers.len())));
    }
    let periodic = match quoted_value(comment, "pbc") {
        Some(p) => {
            let flags: Vec<bool> = p.split_whitespace().map(|f| f == "T").collect();
            if flags.len() != 3 {
                return Err(err(2, "pbc", "expected three T/F flags".into()));
            }
            [flags[0], flags[1], flags[2]]
        }
        None => [true; 3],
    };
    let vectors = [
        [numbers[0], numbers[1], numbers[2]],
        [numbers[3], numbers[4], numbers[5]],
        [numbers[6], numbers[7], numbers[8]],
    ];
    let cell = Cell::new(vectors, periodic).map_err(|e| err(2, "Lattice", e.to_string()))?;
    let mut atoms = Vec::with_capacity(count);
    for k in 0..count {
        let line_no = k + 3;
        let line = lines
            .get(k + 2)
            .ok_or_else(|| err(line_no, "atom", format!("expected {count} atoms, file ends after {k}")))?;
        let mut parts = line.split_whitespace();
        let species: Element = parts
            .next()
            .ok_or_else(|| err(line_no, "element", "missing element".into()))?
            .parse()
            .map_err(|e: Error| err(line_no, "element", e.to_string()))?;
        let mut p = [0.0; 3];
        for (axis, name) in ["x", "y", "z"].iter().enumerate() {
            p[axis] = parts
                .next()
                .ok_or_else(|| err(line_no, name, "missing coordinate".into()))?
                .parse()
                .map_err(|e| err(line_no, name, format!("{e}")))?;
        }
        let role = match species {
            Element::C => Role::Bulk,
            Element::H => Role::TerminatorH,
            Element::O => Role::TerminatorOBridge,
        };
        atoms.push(Atom::new(species, Vector3::from(p), role));
    }
    Structure::new(cell, atoms, crate::crystal::DEFAULT_BOND_CUTOFF)
}

pub fn parse_structure(path: &Path) -> Result<Structure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match StructureFormat::from_path(path) {
        StructureFormat::Xyz => parse_xyz(&text),
        StructureFormat::Interchange => parse_interchange(&text),
    }
}

pub fn emit_structure(s: &Structure, path: &Path, format: StructureFormat) -> Result<()> {
    let text = match format {
        StructureFormat::Xyz => emit_xyz(s),
        StructureFormat::Interchange => emit_interchange(s)?,
    };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
