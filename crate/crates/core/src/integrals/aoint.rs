//! AOINT v1: a line-oriented text container for AO-basis integrals, the AO
//! overlap and an initial set of MO coefficients.
//!
//! ```text
//! AOINT 1 <n_ao> <n_mo> <n_elec> <e_nuc>
//! [overlap]
//! i j value
//! [hcore]
//! i j value
//! [eri]
//! i j k l value
//! [mo_coeff]
//! mu p value
//! ```
//!
//! Indices are 1-based, unlisted entries are zero, overlap/hcore may list the
//! upper triangle only and eri lists one canonical index per symmetry class.
//! Lines starting with `#` are comments; `# key=value` comments before the
//! first section are kept as metadata.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{parse_f64, BasisTag, IntegralSet, MOCoefficients, ORTHONORMALITY_TOL};
use crate::tensor::Tensor4;
use crate::{Error, Result};

const CONFLICT_TOL: f64 = 1e-12;

/// Contents of an AOINT file.
#[derive(Debug, Clone)]
pub struct AoIntFixture {
    pub integrals: IntegralSet,
    pub coeffs: MOCoefficients,
    /// `key=value` pairs from leading comment lines, in file order.
    pub metadata: Vec<(String, String)>,
}

impl AoIntFixture {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta(key).and_then(parse_f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Overlap,
    Hcore,
    Eri,
    MoCoeff,
}

impl Section {
    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "[overlap]" => Some(Section::Overlap),
            "[hcore]" => Some(Section::Hcore),
            "[eri]" => Some(Section::Eri),
            "[mo_coeff]" => Some(Section::MoCoeff),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Section::Overlap => "overlap",
            Section::Hcore => "hcore",
            Section::Eri => "eri",
            Section::MoCoeff => "mo_coeff",
        }
    }
}

fn parse_index(tok: &str, max: usize, lineno: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad index '{tok}'")))?;
    if v == 0 || v > max {
        return Err(Error::parse(
            lineno,
            format!("index {v} out of range [1, {max}]"),
        ));
    }
    Ok(v - 1)
}

fn set_symmetric(
    m: &mut DMatrix<f64>,
    seen: &mut HashMap<(usize, usize), f64>,
    i: usize,
    j: usize,
    v: f64,
    lineno: usize,
) -> Result<()> {
    let key = (i.min(j), i.max(j));
    if let Some(&prev) = seen.get(&key) {
        if (prev - v).abs() > CONFLICT_TOL {
            return Err(Error::parse(lineno, format!("conflicting entry {prev} vs {v}")));
        }
    }
    seen.insert(key, v);
    m[(i, j)] = v;
    m[(j, i)] = v;
    Ok(())
}

/// Parses an AOINT v1 file.
///
/// The overlap must be positive definite and the MO coefficients orthonormal
/// with respect to it.
pub fn parse_aoint(text: &str) -> Result<AoIntFixture> {
    let mut lines = text.lines().enumerate();
    let mut metadata = Vec::new();

    let (hdr_line, header) = loop {
        match lines.next() {
            None => return Err(Error::Load("missing AOINT header".into())),
            Some((ln, l)) => {
                let t = l.trim();
                if t.is_empty() {
                    continue;
                }
                if let Some(c) = t.strip_prefix('#') {
                    push_meta(&mut metadata, c);
                    continue;
                }
                break (ln + 1, t.to_string());
            }
        }
    };
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "AOINT" {
        return Err(Error::parse(
            hdr_line,
            "expected 'AOINT 1 <n_ao> <n_mo> <n_elec> <e_nuc>'",
        ));
    }
    if toks[1] != "1" {
        return Err(Error::parse(hdr_line, format!("unsupported version {}", toks[1])));
    }
    let parse_count = |tok: &str, what: &str| -> Result<usize> {
        tok.parse()
            .map_err(|_| Error::parse(hdr_line, format!("bad {what} '{tok}'")))
    };
    let n_ao = parse_count(toks[2], "n_ao")?;
    let n_mo = parse_count(toks[3], "n_mo")?;
    let n_elec = parse_count(toks[4], "n_elec")?;
    let e_nuc = parse_f64(toks[5])
        .ok_or_else(|| Error::parse(hdr_line, format!("bad e_nuc '{}'", toks[5])))?;
    if n_ao == 0 || n_mo == 0 || n_mo > n_ao {
        return Err(Error::Load(format!(
            "dimension mismatch: n_ao = {n_ao}, n_mo = {n_mo}"
        )));
    }

    let mut s = DMatrix::zeros(n_ao, n_ao);
    let mut h = DMatrix::zeros(n_ao, n_ao);
    let mut g = Tensor4::zeros(n_ao);
    let mut c = DMatrix::zeros(n_ao, n_mo);
    let mut seen_s = HashMap::new();
    let mut seen_h = HashMap::new();
    let mut seen_g: HashMap<[usize; 4], f64> = HashMap::new();
    let mut present = Vec::new();
    let mut current: Option<Section> = None;

    for (ln, line) in lines {
        let lineno = ln + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') {
            let sec = Section::from_tag(t)
                .ok_or_else(|| Error::parse(lineno, format!("unknown section '{t}'")))?;
            if present.contains(&sec) {
                return Err(Error::parse(lineno, format!("duplicate section '{t}'")));
            }
            present.push(sec);
            current = Some(sec);
            continue;
        }
        let sec = current.ok_or_else(|| Error::parse(lineno, "entry before any section"))?;
        let toks: Vec<&str> = t.split_whitespace().collect();
        let expected = if sec == Section::Eri { 5 } else { 3 };
        if toks.len() != expected {
            return Err(Error::parse(
                lineno,
                format!("expected {expected} fields in [{}]", sec.name()),
            ));
        }
        let value = parse_f64(toks[expected - 1])
            .ok_or_else(|| Error::parse(lineno, format!("bad value '{}'", toks[expected - 1])))?;
        match sec {
            Section::Overlap => {
                let i = parse_index(toks[0], n_ao, lineno)?;
                let j = parse_index(toks[1], n_ao, lineno)?;
                set_symmetric(&mut s, &mut seen_s, i, j, value, lineno)?;
            }
            Section::Hcore => {
                let i = parse_index(toks[0], n_ao, lineno)?;
                let j = parse_index(toks[1], n_ao, lineno)?;
                set_symmetric(&mut h, &mut seen_h, i, j, value, lineno)?;
            }
            Section::Eri => {
                let mut idx = [0; 4];
                for k in 0..4 {
                    idx[k] = parse_index(toks[k], n_ao, lineno)?;
                }
                let [p, q, r, s_] = idx;
                let canon = canonical(p, q, r, s_);
                if let Some(&prev) = seen_g.get(&canon) {
                    if (prev - value).abs() > CONFLICT_TOL {
                        return Err(Error::parse(
                            lineno,
                            format!("conflicting entry {prev} vs {value}"),
                        ));
                    }
                }
                seen_g.insert(canon, value);
                g.set_8fold(p, q, r, s_, value);
            }
            Section::MoCoeff => {
                let mu = parse_index(toks[0], n_ao, lineno)?;
                let p = parse_index(toks[1], n_mo, lineno)?;
                c[(mu, p)] = value;
            }
        }
    }

    for sec in [Section::Overlap, Section::Hcore, Section::Eri, Section::MoCoeff] {
        if !present.contains(&sec) {
            return Err(Error::Load(format!("missing section [{}]", sec.name())));
        }
    }

    let eig = s.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= 0.0 {
        return Err(Error::Load(format!(
            "overlap matrix is not positive definite (lowest eigenvalue {min_eig:e})"
        )));
    }

    let coeffs = MOCoefficients::new(c);
    let ortho = coeffs.orthonormality_error(&s);
    if ortho > ORTHONORMALITY_TOL {
        return Err(Error::Load(format!(
            "MO coefficients are not orthonormal: |C^T S C - 1| = {ortho:e}"
        )));
    }

    let integrals = IntegralSet {
        n_orb: n_ao,
        h,
        g,
        s,
        e_scalar: e_nuc,
        n_elec,
        ms2: 0,
        basis: BasisTag::Ao,
    };
    Ok(AoIntFixture {
        integrals,
        coeffs,
        metadata,
    })
}

fn canonical(p: usize, q: usize, r: usize, s: usize) -> [usize; 4] {
    let (a, b) = (p.max(q), p.min(q));
    let (c, d) = (r.max(s), r.min(s));
    if (a, b) >= (c, d) {
        [a, b, c, d]
    } else {
        [c, d, a, b]
    }
}

fn push_meta(meta: &mut Vec<(String, String)>, comment: &str) {
    for tok in comment.split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            meta.push((k.to_string(), v.to_string()));
        }
    }
}

/// Serializes a fixture. Output is deterministic: upper-triangle entries,
/// canonical eri indices, 17 significant digits, zeros omitted.
pub fn write_aoint(fixture: &AoIntFixture) -> String {
    let ints = &fixture.integrals;
    let n = ints.n_orb;
    let c = &fixture.coeffs.c;
    let mut out = String::new();
    for (k, v) in &fixture.metadata {
        writeln!(out, "# {k}={v}").unwrap();
    }
    writeln!(
        out,
        "AOINT 1 {} {} {} {:.16e}",
        n,
        c.ncols(),
        ints.n_elec,
        ints.e_scalar
    )
    .unwrap();
    for (tag, m) in [("[overlap]", &ints.s), ("[hcore]", &ints.h)] {
        writeln!(out, "{tag}").unwrap();
        for i in 0..n {
            for j in i..n {
                let v = m[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).unwrap();
                }
            }
        }
    }
    writeln!(out, "[eri]").unwrap();
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    let v = ints.g.get(p, q, r, s);
                    if v != 0.0 {
                        writeln!(out, "{} {} {} {} {:.16e}", p + 1, q + 1, r + 1, s + 1, v)
                            .unwrap();
                    }
                }
            }
        }
    }
    writeln!(out, "[mo_coeff]").unwrap();
    for mu in 0..c.nrows() {
        for p in 0..c.ncols() {
            let v = c[(mu, p)];
            if v != 0.0 {
                writeln!(out, "{} {} {:.16e}", mu + 1, p + 1, v).unwrap();
            }
        }
    }
    out
}
