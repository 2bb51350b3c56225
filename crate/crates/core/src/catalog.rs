//! Embedded schemes and loaders for external ones.
//!
//! Built-in ids: `classic-2x2x2`, `strassen`, `winograd`, `acc-4x4x4` and
//! `acc-4x4x4-alt`. Every built-in is checked when first loaded: exhaustive
//! validation, exact verification of each straight-line program, and the
//! alternative-basis factorization identities.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use crate::dyadic::Dyadic;
use crate::element::Element;
use crate::error::{FmmError, Result};
use crate::lrp::{validate_scheme, LrpScheme, ValidationReport};
use crate::matrix::{classical_multiply, CoeffMatrix, Matrix};
use crate::slp::{eval_slp_with, naive_slp, parse_slp, verify_slp, Instruction, SlpProgram};
use crate::sms::{load_sms, parse_sms};

pub const BUILTIN_IDS: [&str; 5] = ["classic-2x2x2", "strassen", "winograd", "acc-4x4x4", "acc-4x4x4-alt"];

macro_rules! data {
    ($f:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/", $f))
    };
}

/// Sparse core triple and change-of-basis factors of a dense scheme:
/// `L = L_alt * L_cob`, `R = R_alt * R_cob`, `P = P_cob * P_alt`.
#[derive(Clone, Debug)]
pub struct AltBasisScheme {
    pub base: String,
    pub inner: usize,
    pub l_alt: CoeffMatrix,
    pub r_alt: CoeffMatrix,
    pub p_alt: CoeffMatrix,
    pub l_cob: CoeffMatrix,
    pub r_cob: CoeffMatrix,
    pub p_cob: CoeffMatrix,
    pub core_l: SlpProgram,
    pub core_r: SlpProgram,
    pub core_p: SlpProgram,
    pub cob_l: SlpProgram,
    pub cob_r: SlpProgram,
    pub cob_p: SlpProgram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorizationReport {
    pub l: bool,
    pub r: bool,
    pub p: bool,
}

impl FactorizationReport {
    pub fn holds(&self) -> bool {
        self.l && self.r && self.p
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Index `j` of the unit vector `e_j` held by `v`, if any.
fn unit_index(v: &[Dyadic]) -> Option<usize> {
    let mut hit = None;
    for (j, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if *x != Dyadic::one() || hit.is_some() {
            return None;
        }
        hit = Some(j);
    }
    hit
}

/// Change-of-basis program for `L` or `R`, cut out of the dense listing: each
/// basis row that appears verbatim as a row of the dense matrix reuses the
/// listing's variable for it.
fn cob_from_listing_rows(listing: &SlpProgram, alt: &CoeffMatrix, cob: &CoeffMatrix) -> Option<SlpProgram> {
    let mut outs = Vec::with_capacity(cob.rows());
    for j in 0..cob.rows() {
        let i = (0..alt.rows()).find(|&i| unit_index(alt.row(i)) == Some(j))?;
        outs.push(listing.output_names()[i].to_string());
    }
    let prog = listing.restrict(&listing.input_names(), &strs(&outs)).ok()?;
    verify_slp(&prog, cob).then_some(prog)
}

/// Change-of-basis program for `P`: listing inputs that feed a single basis
/// column are renamed to it; the other inputs are folded away as zeros.
fn cob_from_listing_cols(listing: &SlpProgram, alt: &CoeffMatrix, cob: &CoeffMatrix) -> Option<SlpProgram> {
    let mut ins = Vec::with_capacity(cob.cols());
    for j in 0..cob.cols() {
        let i = (0..alt.cols()).find(|&i| unit_index(&alt.column(i)) == Some(j))?;
        ins.push(listing.input_names()[i].to_string());
    }
    let prog = listing.restrict(&strs(&ins), &listing.output_names()).ok()?;
    verify_slp(&prog, cob).then_some(prog)
}

impl AltBasisScheme {
    /// Checks shapes and factorization identities, then builds the programs.
    ///
    /// Change-of-basis programs are cut out of the dense listings when those
    /// are given and the cut verifies; otherwise they are naive.
    pub fn new(
        scheme: &LrpScheme,
        alt: [CoeffMatrix; 3],
        cob: [CoeffMatrix; 3],
        listings: Option<(&SlpProgram, &SlpProgram, &SlpProgram)>,
    ) -> Result<Self> {
        let [l_alt, r_alt, p_alt] = alt;
        let [l_cob, r_cob, p_cob] = cob;
        let (m, k, n) = scheme.dims();
        let rank = scheme.rank();
        let inner = l_cob.rows();
        let shapes = [
            ("L_alt", l_alt.shape(), (rank, inner)),
            ("R_alt", r_alt.shape(), (rank, inner)),
            ("P_alt", p_alt.shape(), (inner, rank)),
            ("L_cob", l_cob.shape(), (inner, m * k)),
            ("R_cob", r_cob.shape(), (inner, k * n)),
            ("P_cob", p_cob.shape(), (m * n, inner)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(FmmError::Shape(format!(
                    "{name} is {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )));
            }
        }
        let t_names = names("t", inner);
        let core_l = naive_slp(&l_alt, &strs(&t_names), &strs(&names("l", rank)))?;
        let core_r = naive_slp(&r_alt, &strs(&t_names), &strs(&names("r", rank)))?;
        let core_p = naive_slp(&p_alt, &strs(&names("p", rank)), &strs(&names("w", inner)))?;

        let derived = listings.map(|(sl, sr, sp)| {
            (
                cob_from_listing_rows(sl, &l_alt, &l_cob),
                cob_from_listing_rows(sr, &r_alt, &r_cob),
                cob_from_listing_cols(sp, &p_alt, &p_cob),
            )
        });
        let (dl, dr, dp) = derived.unwrap_or((None, None, None));
        let a_names = names("a", m * k);
        let b_names = names("b", k * n);
        let c_names = names("c", m * n);
        let cob_l = match dl {
            Some(p) => p,
            None => naive_slp(&l_cob, &strs(&a_names), &strs(&t_names))?,
        };
        let cob_r = match dr {
            Some(p) => p,
            None => naive_slp(&r_cob, &strs(&b_names), &strs(&t_names))?,
        };
        let cob_p = match dp {
            Some(p) => p,
            None => naive_slp(&p_cob, &strs(&t_names), &strs(&c_names))?,
        };

        let alt = AltBasisScheme {
            base: scheme.id().to_string(),
            inner,
            l_alt,
            r_alt,
            p_alt,
            l_cob,
            r_cob,
            p_cob,
            core_l,
            core_r,
            core_p,
            cob_l,
            cob_r,
            cob_p,
        };
        if !alt.check_factorization(scheme).holds() {
            return Err(FmmError::Invalid(format!(
                "alternative basis does not factor scheme '{}'",
                scheme.id()
            )));
        }
        Ok(alt)
    }

    /// Exact products `L_alt*L_cob`, `R_alt*R_cob`, `P_cob*P_alt` against the scheme.
    pub fn check_factorization(&self, scheme: &LrpScheme) -> FactorizationReport {
        let eq = |a: &CoeffMatrix, b: &CoeffMatrix, want: &CoeffMatrix| {
            classical_multiply(a, b).map(|p| p == *want).unwrap_or(false)
        };
        FactorizationReport {
            l: eq(&self.l_alt, &self.l_cob, scheme.l()),
            r: eq(&self.r_alt, &self.r_cob, scheme.r()),
            p: eq(&self.p_cob, &self.p_alt, scheme.p()),
        }
    }

    pub fn programs_verify(&self) -> bool {
        verify_slp(&self.core_l, &self.l_alt)
            && verify_slp(&self.core_r, &self.r_alt)
            && verify_slp(&self.core_p, &self.p_alt)
            && verify_slp(&self.cob_l, &self.l_cob)
            && verify_slp(&self.cob_r, &self.r_cob)
            && verify_slp(&self.cob_p, &self.p_cob)
    }
}

/// A scheme with its optional straight-line programs and alternative basis.
#[derive(Clone, Debug)]
pub struct SchemeBundle {
    pub scheme: LrpScheme,
    pub slp_l: Option<SlpProgram>,
    pub slp_r: Option<SlpProgram>,
    pub slp_had: Option<SlpProgram>,
    pub slp_p: Option<SlpProgram>,
    pub alt: Option<AltBasisScheme>,
}

/// Outcome of checking every component of a bundle.
#[derive(Clone, Debug)]
pub struct BundleReport {
    pub validation: ValidationReport,
    /// `(program name, verified)` for every program present.
    pub programs: Vec<(String, bool)>,
    pub factorization: Option<FactorizationReport>,
}

impl BundleReport {
    pub fn is_ok(&self) -> bool {
        self.validation.is_valid()
            && self.programs.iter().all(|(_, ok)| *ok)
            && self.factorization.is_none_or(|f| f.holds())
    }
}

/// True iff output `i` is `input[i] * input[r + i]`.
pub fn is_hadamard_program(p: &SlpProgram, rank: usize) -> bool {
    if p.inputs().len() != 2 * rank || p.outputs().len() != rank {
        return false;
    }
    p.outputs().iter().enumerate().all(|(i, &o)| {
        p.instructions().iter().any(|ins| match ins {
            Instruction::Product { target, left, right } => {
                *target == o
                    && ((*left == p.inputs()[i] && *right == p.inputs()[rank + i])
                        || (*right == p.inputs()[i] && *left == p.inputs()[rank + i]))
            }
            _ => false,
        })
    })
}

impl SchemeBundle {
    pub fn from_scheme(scheme: LrpScheme) -> Self {
        SchemeBundle {
            scheme,
            slp_l: None,
            slp_r: None,
            slp_had: None,
            slp_p: None,
            alt: None,
        }
    }

    pub fn id(&self) -> &str {
        self.scheme.id()
    }

    pub fn has_slps(&self) -> bool {
        self.slp_l.is_some() && self.slp_r.is_some() && self.slp_had.is_some() && self.slp_p.is_some()
    }

    pub fn check(&self) -> BundleReport {
        let s = &self.scheme;
        let mut programs = Vec::new();
        for (name, prog, m) in [
            ("L", &self.slp_l, s.l()),
            ("R", &self.slp_r, s.r()),
            ("P", &self.slp_p, s.p()),
        ] {
            if let Some(p) = prog {
                programs.push((name.to_string(), verify_slp(p, m)));
            }
        }
        if let Some(h) = &self.slp_had {
            programs.push(("hadamard".to_string(), is_hadamard_program(h, s.rank())));
        }
        if let Some(alt) = &self.alt {
            for (name, prog, m) in [
                ("L_alt", &alt.core_l, &alt.l_alt),
                ("R_alt", &alt.core_r, &alt.r_alt),
                ("P_alt", &alt.core_p, &alt.p_alt),
                ("L_cob", &alt.cob_l, &alt.l_cob),
                ("R_cob", &alt.cob_r, &alt.r_cob),
                ("P_cob", &alt.cob_p, &alt.p_cob),
            ] {
                programs.push((name.to_string(), verify_slp(prog, m)));
            }
        }
        BundleReport {
            validation: validate_scheme(s),
            programs,
            factorization: self.alt.as_ref().map(|a| a.check_factorization(s)),
        }
    }

    /// Runs the four programs in sequence on one `m x k` by `k x n` product.
    pub fn apply_slps<T: Element>(&self, a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
        let (Some(sl), Some(sr), Some(sh), Some(sp)) = (&self.slp_l, &self.slp_r, &self.slp_had, &self.slp_p)
        else {
            return Err(FmmError::Invalid(format!("scheme '{}' has no programs", self.id())));
        };
        let (m, k, n) = self.scheme.dims();
        if a.shape() != (m, k) || b.shape() != (k, n) {
            return Err(FmmError::Shape("operands do not match the scheme".into()));
        }
        let mul = |x: &T, y: &T| x.mul(y);
        let l = eval_slp_with(sl, a.vectorize(), mul)?;
        let r = eval_slp_with(sr, b.vectorize(), mul)?;
        let h = eval_slp_with(sh, l.into_iter().chain(r).collect(), mul)?;
        let c = eval_slp_with(sp, h, mul)?;
        Matrix::devectorize(&c, m, n)
    }

    /// Programs used by the recursion: the bundle's own, or naive ones.
    pub fn programs_or_naive(&self) -> Result<[SlpProgram; 4]> {
        if let (Some(l), Some(r), Some(h), Some(p)) = (&self.slp_l, &self.slp_r, &self.slp_had, &self.slp_p) {
            return Ok([l.clone(), r.clone(), h.clone(), p.clone()]);
        }
        naive_programs(&self.scheme)
    }
}

/// Naive programs for all three stages of a scheme.
pub fn naive_programs(s: &LrpScheme) -> Result<[SlpProgram; 4]> {
    let (m, k, n) = s.dims();
    let rank = s.rank();
    let (a, b, c) = (names("a", m * k), names("b", k * n), names("c", m * n));
    let (l, r, p) = (names("l", rank), names("r", rank), names("p", rank));
    let lp = naive_slp(s.l(), &strs(&a), &strs(&l))?;
    let rp = naive_slp(s.r(), &strs(&b), &strs(&r))?;
    let mut text = format!("#inputs: {} {}\n#outputs: {}\n", l.join(" "), r.join(" "), p.join(" "));
    for i in 0..rank {
        text.push_str(&format!("p{i}=l{i}*r{i};\n"));
    }
    let hp = parse_slp(&text)?;
    let pp = naive_slp(s.p(), &strs(&p), &strs(&c))?;
    Ok([lp, rp, hp, pp])
}

/// Solves `mk = a`, `kn = b`, `mn = c` for positive integers.
fn infer_dims(l: &CoeffMatrix, r: &CoeffMatrix, p: &CoeffMatrix) -> Result<(usize, usize, usize)> {
    let (a, b, c) = (l.cols(), r.cols(), p.rows());
    let k2 = a * b / c.max(1);
    let k = (k2 as f64).sqrt().round() as usize;
    if k == 0 || a % k != 0 || b % k != 0 {
        return Err(FmmError::Shape(format!(
            "cannot infer <m,k,n> from L:{}x{}, R:{}x{}, P:{}x{}",
            l.rows(),
            a,
            r.rows(),
            b,
            c,
            p.cols()
        )));
    }
    let (m, n) = (a / k, b / k);
    if m * n != c {
        return Err(FmmError::Shape("inconsistent L, R, P dimensions".into()));
    }
    Ok((m, k, n))
}

pub fn scheme_from_matrices(id: &str, l: CoeffMatrix, r: CoeffMatrix, p: CoeffMatrix) -> Result<LrpScheme> {
    let dims = infer_dims(&l, &r, &p)?;
    LrpScheme::new(id, dims, l, r, p)
}

struct Sources<'a> {
    lrp: [&'a str; 3],
    slps: Option<[&'a str; 4]>,
    alt: Option<([&'a str; 3], [&'a str; 3])>,
}

fn build_bundle(id: &str, src: Sources<'_>) -> Result<SchemeBundle> {
    let [l, r, p] = src.lrp.map(parse_sms);
    let scheme = scheme_from_matrices(id, l?, r?, p?)?;
    let mut bundle = SchemeBundle::from_scheme(scheme);
    if let Some(slps) = src.slps {
        let [l, r, h, p] = slps.map(parse_slp);
        bundle.slp_l = Some(l?);
        bundle.slp_r = Some(r?);
        bundle.slp_had = Some(h?);
        bundle.slp_p = Some(p?);
    }
    if let Some((alt, cob)) = src.alt {
        let [la, ra, pa] = alt.map(parse_sms);
        let [lc, rc, pc] = cob.map(parse_sms);
        let listings = match (&bundle.slp_l, &bundle.slp_r, &bundle.slp_p) {
            (Some(l), Some(r), Some(p)) => Some((l, r, p)),
            _ => None,
        };
        bundle.alt = Some(AltBasisScheme::new(
            &bundle.scheme,
            [la?, ra?, pa?],
            [lc?, rc?, pc?],
            listings,
        )?);
    }
    Ok(bundle)
}

fn load_builtin(id: &str) -> Result<SchemeBundle> {
    let acc_lrp = [data!("acc-4x4x4_L.sms"), data!("acc-4x4x4_R.sms"), data!("acc-4x4x4_P.sms")];
    let acc_slps = [
        data!("acc-4x4x4_L.slp"),
        data!("acc-4x4x4_R.slp"),
        data!("acc-4x4x4_had.slp"),
        data!("acc-4x4x4_P.slp"),
    ];
    let src = match id {
        "classic-2x2x2" => Sources {
            lrp: [data!("classic-2x2x2_L.sms"), data!("classic-2x2x2_R.sms"), data!("classic-2x2x2_P.sms")],
            slps: None,
            alt: None,
        },
        "strassen" => Sources {
            lrp: [data!("strassen_L.sms"), data!("strassen_R.sms"), data!("strassen_P.sms")],
            slps: None,
            alt: None,
        },
        "winograd" => Sources {
            lrp: [data!("winograd_L.sms"), data!("winograd_R.sms"), data!("winograd_P.sms")],
            slps: Some([
                data!("winograd_L.slp"),
                data!("winograd_R.slp"),
                data!("winograd_had.slp"),
                data!("winograd_P.slp"),
            ]),
            alt: None,
        },
        "acc-4x4x4" => Sources {
            lrp: acc_lrp,
            slps: Some(acc_slps),
            alt: None,
        },
        "acc-4x4x4-alt" => Sources {
            lrp: acc_lrp,
            slps: Some(acc_slps),
            alt: Some((
                [
                    data!("acc-4x4x4_alt_L.sms"),
                    data!("acc-4x4x4_alt_R.sms"),
                    data!("acc-4x4x4_alt_P.sms"),
                ],
                [
                    data!("acc-4x4x4_cob_L.sms"),
                    data!("acc-4x4x4_cob_R.sms"),
                    data!("acc-4x4x4_cob_P.sms"),
                ],
            )),
        },
        other => return Err(FmmError::UnknownScheme(other.to_string())),
    };
    let bundle = build_bundle(id, src)?;
    let report = bundle.check();
    if !report.is_ok() {
        return Err(FmmError::Invalid(format!(
            "embedded scheme '{id}' failed its load-time check: {report:?}"
        )));
    }
    Ok(bundle)
}

/// A built-in bundle, checked on first use.
pub fn builtin(id: &str) -> Result<SchemeBundle> {
    static CACHE: OnceLock<Mutex<HashMap<String, SchemeBundle>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("catalog cache poisoned").get(id) {
        return Ok(b.clone());
    }
    let bundle = load_builtin(id)?;
    cache
        .lock()
        .expect("catalog cache poisoned")
        .insert(id.to_string(), bundle.clone());
    Ok(bundle)
}

fn read_opt(path: &Path) -> Result<Option<String>> {
    if path.exists() {
        Ok(Some(std::fs::read_to_string(path)?))
    } else {
        Ok(None)
    }
}

/// Loads `<prefix>_{L,R,P}.sms`, plus `<prefix>_{L,R,had,P}.slp` and
/// `<prefix>_{alt,cob}_{L,R,P}.sms` when all files of a group exist.
/// Unlike built-ins, the result is not validated here.
pub fn load_bundle(prefix: &Path) -> Result<SchemeBundle> {
    let file = |suffix: &str| -> PathBuf {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let id = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".into());
    let lrp = ["_L.sms", "_R.sms", "_P.sms"]
        .iter()
        .map(|s| std::fs::read_to_string(file(s)).map_err(FmmError::from))
        .collect::<Result<Vec<_>>>()?;
    let slps: Vec<Option<String>> = ["_L.slp", "_R.slp", "_had.slp", "_P.slp"]
        .iter()
        .map(|s| read_opt(&file(s)))
        .collect::<Result<_>>()?;
    let alts: Vec<Option<String>> = ["_alt_L.sms", "_alt_R.sms", "_alt_P.sms", "_cob_L.sms", "_cob_R.sms", "_cob_P.sms"]
        .iter()
        .map(|s| read_opt(&file(s)))
        .collect::<Result<_>>()?;

    let slp_strs: Option<Vec<&str>> = slps.iter().map(|s| s.as_deref()).collect();
    let alt_strs: Option<Vec<&str>> = alts.iter().map(|s| s.as_deref()).collect();
    let mut bundle = build_bundle(
        &id,
        Sources {
            lrp: [&lrp[0], &lrp[1], &lrp[2]],
            slps: slp_strs.map(|v| [v[0], v[1], v[2], v[3]]),
            alt: alt_strs.map(|v| ([v[0], v[1], v[2]], [v[3], v[4], v[5]])),
        },
    )?;
    // the Hadamard program is implied by the rank when only L, R, P programs exist
    if bundle.slp_had.is_none() && slps[0].is_some() && slps[1].is_some() && slps[3].is_some() && slps[2].is_none() {
        let [_, _, h, _] = naive_programs(&bundle.scheme)?;
        bundle.slp_l = Some(parse_slp(slps[0].as_deref().unwrap_or_default())?);
        bundle.slp_r = Some(parse_slp(slps[1].as_deref().unwrap_or_default())?);
        bundle.slp_had = Some(h);
        bundle.slp_p = Some(parse_slp(slps[3].as_deref().unwrap_or_default())?);
    }
    Ok(bundle)
}

/// Loads a scheme from three SMS files.
pub fn load_lrp_files(id: &str, l: &Path, r: &Path, p: &Path) -> Result<SchemeBundle> {
    let scheme = scheme_from_matrices(id, load_sms(l)?, load_sms(r)?, load_sms(p)?)?;
    Ok(SchemeBundle::from_scheme(scheme))
}

/// Resolves a built-in id, an id found in one of `dirs`, or a file prefix.
pub fn resolve(name: &str, dirs: &[PathBuf]) -> Result<SchemeBundle> {
    match builtin(name) {
        Err(FmmError::UnknownScheme(_)) => {}
        other => return other,
    }
    for d in dirs {
        let prefix = d.join(name);
        let mut l = prefix.as_os_str().to_owned();
        l.push("_L.sms");
        if Path::new(&l).exists() {
            return load_bundle(&prefix);
        }
    }
    let prefix = Path::new(name);
    let mut l = prefix.as_os_str().to_owned();
    l.push("_L.sms");
    if Path::new(&l).exists() {
        return load_bundle(prefix);
    }
    Err(FmmError::UnknownScheme(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: usize, cols: usize, v: &[i64]) -> CoeffMatrix {
        Matrix::from_vec(rows, cols, v.iter().map(|&x| Dyadic::from(x)).collect()).unwrap()
    }

    #[test]
    fn accurate_scheme_shape_and_coefficients() {
        let b = builtin("acc-4x4x4").unwrap();
        assert_eq!(b.scheme.dims(), (4, 4, 4));
        assert_eq!(b.scheme.rank(), 48);
        let eighth = Dyadic::normalize(1, -3);
        assert!(b
            .scheme
            .p()
            .as_slice()
            .iter()
            .all(|x| x.is_zero() || x.abs() == eighth));
    }

    #[test]
    fn classic_matches_displayed_matrices() {
        let s = builtin("classic-2x2x2").unwrap().scheme;
        let l = ints(8, 4, &[1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1]);
        let r = ints(8, 4, &[1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1]);
        let p = ints(
            4,
            8,
            &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1],
        );
        assert_eq!((s.l(), s.r(), s.p()), (&l, &r, &p));
    }

    #[test]
    fn all_builtins_load() {
        for id in BUILTIN_IDS {
            let b = builtin(id).unwrap();
            assert!(b.check().is_ok(), "{id}");
        }
        assert!(matches!(builtin("dps24"), Err(FmmError::UnknownScheme(_))));
    }

    #[test]
    fn alt_inner_dimension() {
        let alt = builtin("acc-4x4x4-alt").unwrap().alt.unwrap();
        assert_eq!(alt.inner, 47);
        assert!(alt.programs_verify());
    }

    #[test]
    fn naive_fallback_matches_scheme() {
        let s = builtin("strassen").unwrap().scheme;
        let [l, r, h, p] = naive_programs(&s).unwrap();
        assert!(verify_slp(&l, s.l()) && verify_slp(&r, s.r()) && verify_slp(&p, s.p()));
        assert!(is_hadamard_program(&h, 7));
    }

    #[test]
    fn dims_inference() {
        let b = builtin("strassen").unwrap().scheme;
        assert_eq!(infer_dims(b.l(), b.r(), b.p()).unwrap(), (2, 2, 2));
        let l = Matrix::<Dyadic>::zeros(3, 6);
        let r = Matrix::<Dyadic>::zeros(3, 12);
        let p = Matrix::<Dyadic>::zeros(8, 3);
        assert_eq!(infer_dims(&l, &r, &p).unwrap(), (2, 3, 4));
    }
}
