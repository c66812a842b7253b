//! Generator matrices for polar, multi-kernel polar and (MK-)PAC codes, and
//! the coset wiretap encoder built on top of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// The kernel fixture shipped with the crate. [`Kernel::builtin`] is checked
/// against it in tests and by the self-test command.
pub const KERNEL_FIXTURE: &str = include_str!("../fixtures/kernels.txt");

/// Spec files shipped with the crate, by file stem.
pub const BUNDLED_SPECS: &[(&str, &str)] = &[
    ("g2", include_str!("../fixtures/specs/g2.json")),
    ("n16_mkpac", include_str!("../fixtures/specs/n16_mkpac.json")),
    ("n32_mkpac", include_str!("../fixtures/specs/n32_mkpac.json")),
    ("n64_mkpac", include_str!("../fixtures/specs/n64_mkpac.json")),
    ("n128_mkpac", include_str!("../fixtures/specs/n128_mkpac.json")),
    ("n256_mkpac", include_str!("../fixtures/specs/n256_mkpac.json")),
    ("n16_polar", include_str!("../fixtures/specs/n16_polar.json")),
    ("n32_polar", include_str!("../fixtures/specs/n32_polar.json")),
    ("n64_polar", include_str!("../fixtures/specs/n64_polar.json")),
    ("n128_polar", include_str!("../fixtures/specs/n128_polar.json")),
    ("n256_polar", include_str!("../fixtures/specs/n256_polar.json")),
    ("n128_mkpolar", include_str!("../fixtures/specs/n128_mkpolar.json")),
];

/// Looks up a bundled spec by stem, with or without `.json`.
pub fn bundled_spec(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED_SPECS.iter().find(|(n, _)| *n == stem).map(|(_, text)| *text)
}

const G2_ROWS: [&str; 2] = ["10", "11"];

const G8_ROWS: [&str; 8] = [
    "10000000", "11000000", "10100000", "10010000", "11101000", "11010100", "10110010", "11111111",
];

const G16_ROWS: [&str; 16] = [
    "0000000000000001",
    "0000000100000001",
    "0000000000010001",
    "0000000000000101",
    "0000000000000011",
    "0000000000110011",
    "0000000000001111",
    "0001000100011110",
    "0000001100000011",
    "0000001101100101",
    "0000010100111001",
    "0101010101010101",
    "0011001100110011",
    "0000111100001111",
    "0000000011111111",
    "1111111111111111",
];

/// A square, invertible polarization kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub name: String,
    pub matrix: BitMatrix,
}

impl Kernel {
    pub const BUILTIN_NAMES: [&'static str; 3] = ["G2", "G8", "G16"];

    pub fn g2() -> Self {
        Self::builtin("G2").expect("G2 is built in")
    }

    pub fn g8() -> Self {
        Self::builtin("G8").expect("G8 is built in")
    }

    pub fn g16() -> Self {
        Self::builtin("G16").expect("G16 is built in")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let rows: &[&str] = match name {
            "G2" => &G2_ROWS,
            "G8" => &G8_ROWS,
            "G16" => &G16_ROWS,
            _ => return None,
        };
        let matrix = BitMatrix::from_row_strings(rows).expect("built-in kernels are well formed");
        Some(Self {
            name: name.to_string(),
            matrix,
        })
    }

    /// A user-supplied kernel given as rows of '0'/'1'.
    pub fn custom<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let matrix = BitMatrix::from_row_strings(rows)?;
        if !matrix.is_square() {
            return Err(Error::InvalidSpec(format!(
                "kernel must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_invertible() {
            return Err(Error::InvalidSpec("kernel is not invertible over GF(2)".into()));
        }
        let name = format!("custom{}", matrix.rows());
        Ok(Self { name, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Parses the `[NAME]`-sectioned kernel fixture format.
pub fn parse_kernel_fixture(text: &str) -> Result<Vec<(String, BitMatrix)>> {
    let mut out = Vec::new();
    let mut current: Option<(String, Vec<String>)> = None;
    let flush = |cur: Option<(String, Vec<String>)>, out: &mut Vec<(String, BitMatrix)>| -> Result<()> {
        if let Some((name, rows)) = cur {
            out.push((name, BitMatrix::from_row_strings(&rows)?));
        }
        Ok(())
    };
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            flush(current.take(), &mut out)?;
            current = Some((name.to_string(), Vec::new()));
        } else if let Some((_, rows)) = current.as_mut() {
            rows.push(line.to_string());
        } else {
            return Err(Error::Parse(format!("row {line:?} outside a kernel section")));
        }
    }
    flush(current, &mut out)?;
    Ok(out)
}

/// Compares kernel fixture text against the built-in constants. Returns the
/// names of kernels that are missing or differ.
pub fn check_kernel_fixture(text: &str) -> Result<Vec<String>> {
    let parsed = parse_kernel_fixture(text)?;
    let mut bad = Vec::new();
    for name in Kernel::BUILTIN_NAMES {
        let builtin = Kernel::builtin(name).expect("listed as built in");
        match parsed.iter().find(|(n, _)| n == name) {
            Some((_, m)) if *m == builtin.matrix => {}
            _ => bad.push(name.to_string()),
        }
    }
    Ok(bad)
}

/// Code family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Polar,
    MkPolar,
    Pac,
    MkPac,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Polar => "polar",
            Family::MkPolar => "mk-polar",
            Family::Pac => "pac",
            Family::MkPac => "mk-pac",
        })
    }
}

/// Rule for choosing which inputs carry the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateProfile {
    /// Worst eavesdropper bit-channels first (largest erasure probability).
    #[default]
    Bhattacharyya,
    /// Lowest row weight of the inner transform first.
    ReedMuller,
}

impl fmt::Display for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateProfile::Bhattacharyya => "bhattacharyya",
            RateProfile::ReedMuller => "reed-muller",
        })
    }
}

/// A kernel as written in a spec file: a built-in name or explicit rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelRef {
    Named(String),
    Rows(Vec<String>),
}

impl KernelRef {
    pub fn resolve(&self) -> Result<Kernel> {
        match self {
            KernelRef::Named(name) => {
                Kernel::builtin(name).ok_or_else(|| Error::InvalidSpec(format!("unknown kernel {name:?}")))
            }
            KernelRef::Rows(rows) => Kernel::custom(rows),
        }
    }
}

/// Code family description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: Family,
    pub kernels: Vec<KernelRef>,
    pub conv_poly: Vec<u8>,
    pub n: usize,
    #[serde(default)]
    pub rate_profile: RateProfile,
}

/// Coefficient vector of `p(D)` with ones at the given exponents.
pub fn poly_from_exponents(exponents: &[usize]) -> Vec<u8> {
    let len = exponents.iter().max().map_or(1, |&m| m + 1);
    let mut poly = vec![0; len];
    for &e in exponents {
        poly[e] = 1;
    }
    poly
}

fn validate_poly(poly: &[u8]) -> Result<()> {
    let Some(&first) = poly.first() else {
        return Err(Error::InvalidPolynomial("empty coefficient vector".into()));
    };
    if let Some(bad) = poly.iter().find(|&&c| c > 1) {
        return Err(Error::InvalidPolynomial(format!("coefficient {bad} is not binary")));
    }
    if first != 1 {
        return Err(Error::InvalidPolynomial("leading coefficient p0 must be 1".into()));
    }
    if poly[poly.len() - 1] != 1 {
        return Err(Error::InvalidPolynomial("final coefficient must be 1".into()));
    }
    Ok(())
}

/// Upper-triangular Toeplitz generator of the rate-1 convolutional precoder:
/// `P(i, i + t) = p_t`.
pub fn conv_precoder(conv_poly: &[u8], n: usize) -> Result<BitMatrix> {
    validate_poly(conv_poly)?;
    if conv_poly.len() > n {
        return Err(Error::PolynomialTooLong {
            len: conv_poly.len(),
            n,
        });
    }
    let mut p = BitMatrix::zeros(n, n);
    for i in 0..n {
        for (t, &c) in conv_poly.iter().enumerate() {
            if c == 1 && i + t < n {
                p.set(i, i + t, true);
            }
        }
    }
    Ok(p)
}

impl CodeSpec {
    pub fn new(family: Family, kernels: &[&str], conv_poly: Vec<u8>) -> Result<Self> {
        let kernels: Vec<KernelRef> = kernels.iter().map(|k| KernelRef::Named(k.to_string())).collect();
        let n = kernels
            .iter()
            .map(|k| k.resolve().map(|k| k.dim()))
            .product::<Result<usize>>()?;
        let spec = Self {
            family,
            kernels,
            conv_poly,
            n,
            rate_profile: RateProfile::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Arikan polar code of length `2^s`.
    pub fn polar(s: usize) -> Self {
        Self::new(Family::Polar, &vec!["G2"; s.max(1)], vec![1]).expect("polar spec is valid")
    }

    /// A single custom generator, used for hand-built coset codes.
    pub fn custom_generator(generator: &BitMatrix) -> Result<Self> {
        let spec = Self {
            family: Family::MkPolar,
            kernels: vec![KernelRef::Rows(generator.to_row_strings())],
            conv_poly: vec![1],
            n: generator.rows(),
            rate_profile: RateProfile::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The MK-PAC configuration used for each reported blocklength.
    pub fn paper_mk_pac(n: usize) -> Option<Self> {
        let (kernels, exps): (&[&str], &[usize]) = match n {
            16 => (&["G16"], &[0, 2, 3, 5, 6]),
            32 => (&["G2", "G16"], &[0, 2, 3, 5, 6]),
            64 => (&["G2", "G2", "G16"], &[0, 3, 7, 9, 10]),
            128 => (&["G8", "G16"], &[0, 3, 7, 9, 11, 12]),
            256 => (&["G16", "G16"], &[0, 1, 3, 6, 10, 12, 15, 17, 18]),
            _ => return None,
        };
        Some(Self::new(Family::MkPac, kernels, poly_from_exponents(exps)).expect("preset is valid"))
    }

    pub fn with_profile(mut self, profile: RateProfile) -> Self {
        self.rate_profile = profile;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn resolve_kernels(&self) -> Result<Vec<Kernel>> {
        self.kernels.iter().map(KernelRef::resolve).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() {
            return Err(Error::InvalidSpec("at least one kernel is required".into()));
        }
        validate_poly(&self.conv_poly)?;
        let kernels = self.resolve_kernels()?;
        let product: usize = kernels.iter().map(Kernel::dim).product();
        if product != self.n {
            return Err(Error::InvalidSpec(format!(
                "n = {} but kernel dimensions multiply to {product}",
                self.n
            )));
        }
        if self.conv_poly.len() > self.n {
            return Err(Error::PolynomialTooLong {
                len: self.conv_poly.len(),
                n: self.n,
            });
        }
        let all_g2 = self.kernels.iter().all(|k| *k == KernelRef::Named("G2".into()));
        match self.family {
            Family::Polar | Family::Pac if !all_g2 => {
                Err(Error::InvalidSpec(format!("{} codes use only G2 kernels", self.family)))
            }
            Family::Polar | Family::MkPolar if self.conv_poly != [1] => Err(Error::InvalidSpec(format!(
                "{} codes have no precoder; conv_poly must be [1]",
                self.family
            ))),
            _ => Ok(()),
        }
    }

    /// Kronecker product of the kernels in listed order, without precoding.
    pub fn inner_matrix(&self) -> Result<BitMatrix> {
        let kernels = self.resolve_kernels()?;
        let mut acc = BitMatrix::identity(1);
        for k in &kernels {
            acc = acc.kron(&k.matrix);
        }
        Ok(acc)
    }
}

/// `P · (G_k1 ⊗ … ⊗ G_ks)`.
pub fn build_generator(spec: &CodeSpec) -> Result<BitMatrix> {
    spec.validate()?;
    let inner = spec.inner_matrix()?;
    if spec.conv_poly == [1] {
        return Ok(inner);
    }
    conv_precoder(&spec.conv_poly, spec.n)?.matmul(&inner)
}

/// Inputs ordered by descending row weight of `inner`, ties by descending
/// index.
pub fn rm_profile_order(inner: &BitMatrix) -> Vec<usize> {
    let weights = inner.row_weights();
    let mut order: Vec<usize> = (0..inner.rows()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(b.cmp(&a)));
    order
}

/// A coset wiretap code: message bits sit on `message_set`, the remaining
/// inputs carry uniform randomness.
#[derive(Debug, Clone)]
pub struct WiretapCode {
    pub spec: CodeSpec,
    pub generator: BitMatrix,
    message_set: Vec<usize>,
    complement: Vec<usize>,
    inverse: BitMatrix,
}

impl WiretapCode {
    pub fn new(spec: CodeSpec, message_set: &[usize]) -> Result<Self> {
        let generator = build_generator(&spec)?;
        Self::with_generator(spec, generator, message_set)
    }

    pub(crate) fn with_generator(spec: CodeSpec, generator: BitMatrix, message_set: &[usize]) -> Result<Self> {
        let n = generator.rows();
        let mut set = message_set.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.len() != message_set.len() {
            return Err(Error::InvalidSpec("message set has repeated indices".into()));
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= n) {
            return Err(Error::Index { index: bad, bound: n });
        }
        let inverse = generator.invert()?;
        let complement = (0..n).filter(|i| set.binary_search(i).is_err()).collect();
        Ok(Self {
            spec,
            generator,
            message_set: set,
            complement,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.generator.rows()
    }

    pub fn k(&self) -> usize {
        self.message_set.len()
    }

    /// Sorted message positions (0-based).
    pub fn message_set(&self) -> &[usize] {
        &self.message_set
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn encode(&self, message: &[bool], randomness: &[bool]) -> Result<Vec<bool>> {
        if message.len() != self.k() || randomness.len() != self.n() - self.k() {
            return Err(Error::Shape(format!(
                "expected {} message and {} random bits, got {} and {}",
                self.k(),
                self.n() - self.k(),
                message.len(),
                randomness.len()
            )));
        }
        let mut u = vec![false; self.n()];
        for (&i, &b) in self.message_set.iter().zip(message) {
            u[i] = b;
        }
        for (&i, &b) in self.complement.iter().zip(randomness) {
            u[i] = b;
        }
        self.generator.vec_mul(&u)
    }

    pub fn decode(&self, received: &[bool]) -> Result<Vec<bool>> {
        let u = self.inverse.vec_mul(received)?;
        Ok(self.message_set.iter().map(|&i| u[i]).collect())
    }
}

/// Coset code with one message bit whose noise rows span the
/// single-parity-check code, an `(n, n-1)` MDS code.
pub fn spc_coset_code(n: usize) -> Result<WiretapCode> {
    let mut g = BitMatrix::zeros(n, n);
    if n > 0 {
        g.set(0, 0, true);
    }
    for i in 1..n {
        g.set(i, i - 1, true);
        g.set(i, i, true);
    }
    WiretapCode::new(CodeSpec::custom_generator(&g)?, &[0])
}

/// Coset code with `n - 1` message bits whose noise row is the all-ones
/// word, so that the noise spans the `(n, 1)` repetition code.
pub fn repetition_coset_code(n: usize) -> Result<WiretapCode> {
    let mut g = BitMatrix::identity(n);
    for j in 0..n {
        g.set(0, j, true);
    }
    let set: Vec<usize> = (1..n).collect();
    WiretapCode::new(CodeSpec::custom_generator(&g)?, &set)
}
