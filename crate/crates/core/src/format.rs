//! JSON instance and result files, and the `c*t^r + ...` polynomial syntax.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::endo::BlockMatrix;
use crate::error::{Error, Result};
use crate::fp::{self, MatFp};
use crate::laurent::{Precision, SeriesVector};
use crate::rep::{scalar_poly, Rep};
use crate::solver::{FixedVectorResult, Residual};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub i: i64,
    pub j: i64,
    pub entries: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub p: u32,
    pub d: usize,
    pub blocks: Vec<BlockEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

impl InstanceFile {
    pub fn from_generator(a0: &BlockMatrix, metadata: Option<Metadata>) -> Self {
        let blocks = a0
            .blocks()
            .iter()
            .map(|((i, j), m)| BlockEntry {
                i: *i,
                j: *j,
                entries: m.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect(),
            })
            .collect();
        InstanceFile {
            version: FORMAT_VERSION,
            p: a0.modulus(),
            d: a0.dim(),
            blocks,
            metadata,
        }
    }

    /// Parses and checks the file invariants; `origin` names the source in
    /// error locations.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| parse_err(format!("{origin}:{}:{}", e.line(), e.column()), e.to_string()))?;
        file.check(origin)?;
        Ok(file)
    }

    fn check(&self, origin: &str) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(parse_err(format!("{origin}: version"), format!("unsupported version {}", self.version)));
        }
        fp::check_prime(self.p).map_err(|e| parse_err(format!("{origin}: p"), e.to_string()))?;
        if self.d == 0 || self.d > 64 {
            return Err(parse_err(format!("{origin}: d"), format!("d = {} outside [1, 64]", self.d)));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (n, b) in self.blocks.iter().enumerate() {
            let loc = format!("{origin}: blocks[{n}]");
            if !seen.insert((b.i, b.j)) {
                return Err(parse_err(loc, format!("duplicate block ({}, {})", b.i, b.j)));
            }
            if b.entries.len() != self.d || b.entries.iter().any(|r| r.len() != self.d) {
                return Err(parse_err(loc, format!("entries must be a {0}x{0} grid", self.d)));
            }
            for (r, row) in b.entries.iter().enumerate() {
                for (c, &x) in row.iter().enumerate() {
                    if x < 0 || x >= self.p as i64 {
                        return Err(parse_err(
                            format!("{loc}.entries[{r}][{c}]"),
                            format!("entry {x} outside [0, {})", self.p),
                        ));
                    }
                }
            }
            if b.entries.iter().flatten().all(|&x| x == 0) {
                return Err(parse_err(loc, "zero blocks must be omitted"));
            }
        }
        Ok(())
    }

    pub fn generator(&self) -> Result<BlockMatrix> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            blocks.push(((b.i, b.j), MatFp::from_rows(self.p, &b.entries)?));
        }
        BlockMatrix::from_blocks(self.p, self.d, blocks)
    }

    /// The representation, unchecked.
    pub fn rep(&self) -> Result<Rep> {
        Ok(Rep::new(self.generator()?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

/// `"exact"` or a finite bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecisionJson {
    Finite(i64),
    Tag(String),
}

impl From<Precision> for PrecisionJson {
    fn from(p: Precision) -> Self {
        match p {
            Precision::Finite(n) => PrecisionJson::Finite(n),
            Precision::Exact => PrecisionJson::Tag("exact".into()),
        }
    }
}

impl PrecisionJson {
    pub fn to_precision(&self) -> Result<Precision> {
        match self {
            PrecisionJson::Finite(n) => Ok(Precision::Finite(*n)),
            PrecisionJson::Tag(s) if s == "exact" => Ok(Precision::Exact),
            PrecisionJson::Tag(s) => Err(parse_err("prec", format!("expected \"exact\" or an integer, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub p: u32,
    pub d: usize,
    pub lo: i64,
    pub prec: PrecisionJson,
    /// `(degree, coefficient vector)` for the nonzero coefficients.
    pub coeffs: Vec<(i64, Vec<u32>)>,
}

impl From<&SeriesVector> for SeriesJson {
    fn from(v: &SeriesVector) -> Self {
        SeriesJson {
            p: v.modulus(),
            d: v.dim(),
            lo: v.lo(),
            prec: v.prec().into(),
            coeffs: v.terms().map(|(n, c)| (n, c.clone())).collect(),
        }
    }
}

impl SeriesJson {
    pub fn to_series(&self) -> Result<SeriesVector> {
        let coeffs: BTreeMap<i64, Vec<u32>> = self.coeffs.iter().cloned().collect();
        SeriesVector::new(self.p, self.d, self.lo, self.prec.to_precision()?, coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualJson {
    pub r: i64,
    pub checked_below: PrecisionJson,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceJson {
    pub phases: Vec<String>,
    pub invariant_depth: i64,
    pub u0_depth: i64,
    pub d_prime: usize,
    pub i_star: Option<i64>,
    pub j_star: Option<i64>,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub q: Option<i64>,
    pub nilpotency: Option<usize>,
    pub branch: String,
    pub words_explored: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleJson {
    pub window: (i64, i64),
    pub xi: Option<SeriesJson>,
    pub is_fixed: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timings {
    pub total_us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub version: u32,
    pub xi: SeriesJson,
    pub exact: bool,
    pub residuals: Vec<ResidualJson>,
    pub trace: TraceJson,
    pub oracle: OracleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl ResultFile {
    pub fn from_result(res: &FixedVectorResult, timings: Option<Timings>) -> Self {
        let t = &res.trace;
        ResultFile {
            version: FORMAT_VERSION,
            xi: (&res.xi).into(),
            exact: res.exact,
            residuals: res
                .residuals
                .iter()
                .map(|r: &Residual| ResidualJson {
                    r: r.r,
                    checked_below: r.checked_below.into(),
                    pass: r.pass,
                })
                .collect(),
            trace: TraceJson {
                phases: t.phases.clone(),
                invariant_depth: t.invariant_depth,
                u0_depth: t.u0_depth,
                d_prime: t.d_prime,
                i_star: t.i_star,
                j_star: t.j_star,
                a: t.a,
                b: t.b,
                q: t.q,
                nilpotency: t.nilpotency,
                branch: t.branch.clone(),
                words_explored: t.words_explored,
            },
            oracle: OracleJson {
                window: res.oracle.window,
                xi: res.oracle.oracle_xi.as_ref().map(SeriesJson::from),
                is_fixed: res.oracle.oracle_is_fixed,
                agree: res.oracle.agree,
            },
            timings,
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: ResultFile = serde_json::from_str(text)
            .map_err(|e| parse_err(format!("{origin}:{}:{}", e.line(), e.column()), e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(parse_err(format!("{origin}: version"), format!("unsupported version {}", file.version)));
        }
        file.xi.to_series()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

/// Parses `"c*t^r + ..."` into an exact scalar Laurent polynomial.
///
/// Accepted terms: `c`, `t`, `c*t`, `t^r`, `c*t^r`, `c t^r`, with `r`
/// possibly negative or parenthesized, and integer `c` reduced mod `p`.
pub fn parse_poly(p: u32, s: &str) -> Result<SeriesVector> {
    let err = |pos: usize, msg: &str| parse_err(format!("--f column {}", pos + 1), msg.to_string());
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let read_int = |pos: &mut usize| -> Option<i64> {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return None;
        }
        chars[start..*pos].iter().collect::<String>().parse().ok()
    };
    let mut terms = Vec::new();
    skip_ws(&mut pos);
    if pos == chars.len() {
        return Err(err(0, "empty polynomial"));
    }
    let mut first = true;
    while pos < chars.len() {
        let mut sign = 1i64;
        skip_ws(&mut pos);
        if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
            if chars[pos] == '-' {
                sign = -1;
            }
            pos += 1;
            skip_ws(&mut pos);
        } else if !first {
            return Err(err(pos, "expected '+' or '-'"));
        }
        first = false;
        let term_start = pos;
        let coeff = read_int(&mut pos);
        skip_ws(&mut pos);
        let mut exp = 0i64;
        let mut has_t = false;
        if pos < chars.len() && chars[pos] == '*' {
            if coeff.is_none() {
                return Err(err(pos, "'*' without a coefficient"));
            }
            pos += 1;
            skip_ws(&mut pos);
            if pos >= chars.len() || chars[pos] != 't' {
                return Err(err(pos, "expected 't' after '*'"));
            }
        }
        if pos < chars.len() && chars[pos] == 't' {
            has_t = true;
            pos += 1;
            skip_ws(&mut pos);
            exp = 1;
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                skip_ws(&mut pos);
                let paren = pos < chars.len() && chars[pos] == '(';
                if paren {
                    pos += 1;
                }
                let mut esign = 1;
                if pos < chars.len() && (chars[pos] == '-' || chars[pos] == '+') {
                    if chars[pos] == '-' {
                        esign = -1;
                    }
                    pos += 1;
                }
                exp = esign * read_int(&mut pos).ok_or_else(|| err(pos, "expected an exponent"))?;
                if paren {
                    if pos >= chars.len() || chars[pos] != ')' {
                        return Err(err(pos, "expected ')'"));
                    }
                    pos += 1;
                }
            }
        }
        if coeff.is_none() && !has_t {
            return Err(err(term_start, "expected a term"));
        }
        crate::laurent::check_degree(exp).map_err(|_| err(term_start, "exponent out of range"))?;
        terms.push((exp, sign * coeff.unwrap_or(1)));
        skip_ws(&mut pos);
    }
    scalar_poly(p, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials() {
        let f = parse_poly(3, "1*t^0 + 2*t^-1 - t^(3) + 4").unwrap();
        let g = scalar_poly(3, &[(0, 5), (-1, 2), (3, -1)]).unwrap();
        assert_eq!(f, g);
        assert_eq!(parse_poly(2, "t").unwrap(), scalar_poly(2, &[(1, 1)]).unwrap());
        assert!(parse_poly(2, "").is_err());
        assert!(parse_poly(2, "t^").is_err());
        assert!(parse_poly(2, "3 t t").is_err());
    }

    #[test]
    fn instance_errors() {
        let bad = r#"{"version":1,"p":2,"d":2,"blocks":[{"i":0,"j":0,"entries":[[0,2],[0,0]]}]}"#;
        match InstanceFile::parse(bad, "x.json") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "x.json: blocks[0].entries[0][1]"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(InstanceFile::parse("{", "x.json"), Err(Error::Parse { .. })));
    }
}
