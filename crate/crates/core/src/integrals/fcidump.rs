use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{parse_f64, IntegralSet};
use crate::tensor::Tensor4;
use crate::{Error, Result};

const CONFLICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Scalar,
    One(usize, usize),
    Two(usize, usize, usize, usize),
}

fn canonical_one(p: usize, q: usize) -> Key {
    Key::One(p.max(q), p.min(q))
}

fn canonical_two(p: usize, q: usize, r: usize, s: usize) -> Key {
    let (a, b) = (p.max(q), p.min(q));
    let (c, d) = (r.max(s), r.min(s));
    if (a, b) >= (c, d) {
        Key::Two(a, b, c, d)
    } else {
        Key::Two(c, d, a, b)
    }
}

fn header_value(body: &str, key: &str) -> Option<i64> {
    let upper = body.to_ascii_uppercase();
    let bytes = upper.as_bytes();
    let mut from = 0;
    while let Some(off) = upper[from..].find(key) {
        let at = from + off;
        from = at + key.len();
        if at > 0 && bytes[at - 1].is_ascii_alphanumeric() {
            continue;
        }
        let rest = upper[at + key.len()..].trim_start();
        let Some(rest) = rest.strip_prefix('=') else {
            continue;
        };
        let rest = rest.trim_start();
        let end = rest
            .find(|c: char| !(c.is_ascii_digit() || c == '-' || c == '+'))
            .unwrap_or(rest.len());
        return rest[..end].parse().ok();
    }
    None
}

/// Parses an FCIDUMP file into an MO-basis [`IntegralSet`].
///
/// Records with all four indices nonzero are two-electron integrals, records
/// `v i j 0 0` are one-electron integrals, `v 0 0 0 0` is the scalar energy and
/// `v i 0 0 0` (orbital energies) is ignored.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate().peekable();

    // Header: everything up to and including the &END (or '/') terminator.
    let mut header = String::new();
    let mut header_start = None;
    let mut terminated = false;
    for (ln, line) in lines.by_ref() {
        let t = line.trim();
        if t.is_empty() && header_start.is_none() {
            continue;
        }
        if header_start.is_none() {
            if !t.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::parse(ln + 1, "expected '&FCI' header"));
            }
            header_start = Some(ln + 1);
        }
        header.push_str(t);
        header.push(' ');
        let up = t.to_ascii_uppercase();
        if up.contains("&END") || up == "/" || up.ends_with(" /") || up.ends_with(",/") {
            terminated = true;
            break;
        }
    }
    let header_line = header_start.ok_or_else(|| Error::parse(1, "empty file"))?;
    if !terminated {
        return Err(Error::parse(header_line, "unterminated &FCI header"));
    }
    let norb = header_value(&header, "NORB")
        .ok_or_else(|| Error::parse(header_line, "header is missing NORB"))?;
    let nelec = header_value(&header, "NELEC")
        .ok_or_else(|| Error::parse(header_line, "header is missing NELEC"))?;
    let ms2 = header_value(&header, "MS2").unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(Error::parse(header_line, "NORB must be positive and NELEC non-negative"));
    }
    let n = norb as usize;

    let mut seen: HashMap<Key, f64> = HashMap::new();
    let mut h = DMatrix::zeros(n, n);
    let mut g = Tensor4::zeros(n);
    let mut e_scalar = 0.0;

    for (ln, line) in lines {
        let lineno = ln + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::parse(lineno, format!("expected 'value i j k l', got '{t}'")));
        }
        let value = parse_f64(toks[0])
            .ok_or_else(|| Error::parse(lineno, format!("bad value '{}'", toks[0])))?;
        let mut idx = [0usize; 4];
        for (k, tok) in toks[1..].iter().enumerate() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index '{tok}'")))?;
            if v < 0 || v > norb {
                return Err(Error::parse(
                    lineno,
                    format!("index {v} out of range [1, {norb}]"),
                ));
            }
            idx[k] = v as usize;
        }
        let [i, j, k, l] = idx;
        let key = match (i, j, k, l) {
            (0, 0, 0, 0) => Key::Scalar,
            (i, 0, 0, 0) if i > 0 => continue,
            (i, j, 0, 0) if i > 0 && j > 0 => canonical_one(i - 1, j - 1),
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                canonical_two(i - 1, j - 1, k - 1, l - 1)
            }
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("unsupported index pattern {i} {j} {k} {l}"),
                ))
            }
        };
        if let Some(&prev) = seen.get(&key) {
            if (prev - value).abs() > CONFLICT_TOL {
                return Err(Error::parse(
                    lineno,
                    format!("conflicting duplicate record: {prev} vs {value}"),
                ));
            }
            continue;
        }
        seen.insert(key, value);
        match key {
            Key::Scalar => e_scalar = value,
            Key::One(p, q) => {
                h[(p, q)] = value;
                h[(q, p)] = value;
            }
            Key::Two(p, q, r, s) => g.set_8fold(p, q, r, s, value),
        }
    }

    let mut set = IntegralSet::new_mo(h, g, e_scalar, nelec as usize);
    set.ms2 = ms2;
    Ok(set)
}

/// Writes an MO-basis set as FCIDUMP, canonical unique records only.
pub fn write_fcidump(set: &IntegralSet) -> String {
    let n = set.n_orb;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    writeln!(
        out,
        "&FCI NORB={},NELEC={},MS2={},\n ORBSYM={},\n ISYM=1,\n&END",
        n, set.n_elec, set.ms2, orbsym
    )
    .unwrap();
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if (p, q) < (r, s) {
                        continue;
                    }
                    let v = set.g.get(p, q, r, s);
                    if v != 0.0 {
                        writeln!(out, "{:.16e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1).unwrap();
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = set.h[(p, q)];
            if v != 0.0 {
                writeln!(out, "{:.16e} {} {} 0 0", v, p + 1, q + 1).unwrap();
            }
        }
    }
    writeln!(out, "{:.16e} 0 0 0 0", set.e_scalar).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_two_electron_record() {
        let text = "&FCI NORB=1,NELEC=2,MS2=0,\n&END\n0.5 1 1 1 1\n";
        let set = parse_fcidump(text).unwrap();
        assert_eq!(set.g.get(0, 0, 0, 0), 0.5);
        assert_eq!(set.n_elec, 2);
    }

    #[test]
    fn one_electron_record_only_sets_h() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0 &END\n-1.25 1 1 0 0\n";
        let set = parse_fcidump(text).unwrap();
        assert_eq!(set.h[(0, 0)], -1.25);
        assert_eq!(set.h[(0, 1)], 0.0);
        assert_eq!(set.h[(1, 1)], 0.0);
        assert!(set.g.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_and_symmetry_images() {
        let text = "&FCI NORB=3,NELEC=2,MS2=0,\n ORBSYM=1,1,1,\n ISYM=1,\n&END\n\
                    0.2 3 1 2 1\n0.7 2 1 0 0\n1.5D0 0 0 0 0\n0.1 1 0 0 0\n";
        let set = parse_fcidump(text).unwrap();
        assert_eq!(set.e_scalar, 1.5);
        assert_eq!(set.h[(0, 1)], 0.7);
        assert_eq!(set.g.get(0, 2, 0, 1), 0.2);
        assert_eq!(set.g.get(1, 0, 2, 0), 0.2);
        assert_eq!(set.g.max_symmetry_error(), 0.0);
    }

    #[test]
    fn duplicate_consistent_records_are_accepted() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.3 1 2 1 2\n0.3 2 1 2 1\n";
        assert!(parse_fcidump(text).is_ok());
    }

    #[test]
    fn conflicting_duplicate_names_line() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0\n&END\n0.3 1 2 1 2\n0.4 2 1 1 2\n";
        match parse_fcidump(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_index() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0\n&END\n0.3 1 3 1 1\n";
        match parse_fcidump(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        assert!(parse_fcidump("NORB=2\n").is_err());
        assert!(parse_fcidump("&FCI NELEC=2 &END\n").is_err());
        assert!(parse_fcidump("&FCI NORB=2,NELEC=2\n0.1 1 1 1 1\n").is_err());
    }

    #[test]
    fn orbsym_does_not_shadow_norb() {
        assert_eq!(header_value("&FCI ORBSYM=1,1, NORB=2,", "NORB"), Some(2));
        assert_eq!(header_value("&FCI NORB = 4 ,NELEC=2", "NORB"), Some(4));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.3 1 2 1 2\n0.6 1 1 2 2\n-1.1 1 1 0 0\n\
                    0.05 2 1 0 0\n0.7 0 0 0 0\n";
        let a = parse_fcidump(text).unwrap();
        let b = parse_fcidump(&write_fcidump(&a)).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.g, b.g);
        assert_eq!(a.e_scalar, b.e_scalar);
    }
}
