//! Physical and adversarial state constructors, plus the text grammar the
//! CLI uses to name them.
//!
//! Families:
//! * [`vacuum`] — all four modes empty.
//! * [`singlet_sector`] — the n-pair polarization singlet, the archetypal
//!   anticorrelated state every witness here is tailored to.
//! * [`bsv`] — bright-squeezed-vacuum-like superposition of singlet sectors
//!   with weights `√(n+1)·tanhⁿΓ / cosh²Γ` (strongly driven Type-II
//!   downconversion form), truncated and renormalized with the discarded
//!   tail recorded.
//! * [`random_separable`] — seeded convex mixtures of random product states,
//!   the adversarial family for soundness tests.
//!
//! Modifiers: [`mix_white_noise`] (convex admixture of the maximally mixed
//! state) and [`apply_loss`] (balanced per-beam binomial photon loss, kept
//! symbolic and evaluated in the Heisenberg picture).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::fock::{mode_rotation, QuantumState, Truncation};
use crate::{Error, Result};

/// Truncation-tail weight above which a constructed state should be treated
/// as unreliable (the CLI warns; the library only records the value).
pub const TAIL_THRESHOLD: f64 = 1e-6;

pub fn vacuum(trunc: Truncation) -> QuantumState {
    QuantumState::vacuum(trunc)
}

/// Normalized n-pair polarization singlet
/// `(a†_H b†_V − a†_V b†_H)ⁿ |Ω⟩ / ‖·‖`; its amplitudes over the occupation
/// basis are `(−1)^{n−k}/√(n+1)` at `(k, n−k; n−k, k)`.
pub fn singlet_sector(n: u32, trunc: Truncation) -> Result<QuantumState> {
    if n > trunc.n_max() {
        return Err(Error::InvalidParameter(format!(
            "singlet sector n={n} exceeds truncation n_max={}",
            trunc.n_max()
        )));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); trunc.total_dim()];
    write_singlet_sector(&mut psi, n, 1.0, &trunc);
    QuantumState::from_pure(psi, trunc)
}

/// Adds `scale` times the normalized n-pair singlet to `psi`.
fn write_singlet_sector(psi: &mut [Complex64], n: u32, scale: f64, trunc: &Truncation) {
    let d = trunc.beam_dim();
    let norm = ((n + 1) as f64).sqrt();
    for k in 0..=n {
        let a = trunc.beam_index(n, k);
        let b = trunc.beam_index(n, n - k);
        let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        psi[a * d + b] += Complex64::new(sign * scale / norm, 0.0);
    }
}

/// Probability weight of the bright-squeezed-vacuum state above sector
/// `n_max`, in closed form: with `x = tanh²Γ`,
/// `tail = x^{M+1}·[(M+2) − (M+1)x]`.
pub fn bsv_tail_mass(gain: f64, n_max: u32) -> f64 {
    let x = gain.tanh().powi(2);
    let m = n_max as f64;
    x.powi(n_max as i32 + 1) * ((m + 2.0) - (m + 1.0) * x)
}

/// Smallest truncation keeping the bright-squeezed-vacuum tail below
/// `threshold`.
pub fn bsv_min_nmax(gain: f64, threshold: f64) -> u32 {
    (0..).find(|&m| bsv_tail_mass(gain, m) < threshold).expect("tanh²Γ < 1, tail → 0")
}

/// Bright-squeezed-vacuum-like state: superposition of n-pair singlets with
/// amplitudes `√(n+1)·tanhⁿΓ / cosh²Γ`, truncated at `n_max` pairs and
/// renormalized. The discarded weight is recorded as the state's tail mass;
/// callers wanting `tail < 1e-6` can size the truncation with
/// [`bsv_min_nmax`].
pub fn bsv(gain: f64, trunc: Truncation) -> Result<QuantumState> {
    if gain.is_nan() || gain < 0.0 {
        return Err(Error::InvalidParameter(format!("gain {gain} must be ≥ 0")));
    }
    let x = gain.tanh().powi(2);
    // Σ_{n≤M} (n+1) xⁿ — the kept weight before the cosh⁻⁴ prefactor.
    let kept: f64 = (0..=trunc.n_max()).map(|n| (n + 1) as f64 * x.powi(n as i32)).sum();
    let mut psi = vec![Complex64::new(0.0, 0.0); trunc.total_dim()];
    for n in 0..=trunc.n_max() {
        // √(n+1)·tanhⁿΓ, renormalized over the kept sectors.
        let sector_amp = ((n + 1) as f64).sqrt() * gain.tanh().powi(n as i32) / kept.sqrt();
        write_singlet_sector(&mut psi, n, sector_amp, &trunc);
    }
    let state = QuantumState::from_pure(psi, trunc)?;
    Ok(state.with_tail_mass(bsv_tail_mass(gain, trunc.n_max())))
}

/// Seeded random separable state: a convex mixture of `terms` product pure
/// states. Beam amplitudes are i.i.d. complex Gaussians normalized to unit
/// length (uniform on each beam's truncated sphere); weights come from
/// normalized Exp(1) draws (flat on the simplex). Draw order is fixed — all
/// weights, then per term the beam-A amplitudes (re, im per entry) followed
/// by beam B — so results are reproducible bit for bit given the seed.
pub fn random_separable(seed: u64, terms: usize, trunc: Truncation) -> Result<QuantumState> {
    if terms < 1 {
        return Err(Error::InvalidParameter("separable mixture needs terms ≥ 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..terms).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let d = trunc.beam_dim();
    let mut parts = Vec::with_capacity(terms);
    for w in raw {
        let a = random_unit_vector(d, &mut rng);
        let b = random_unit_vector(d, &mut rng);
        let mut psi = vec![Complex64::new(0.0, 0.0); trunc.total_dim()];
        for (ia, &av) in a.iter().enumerate() {
            for (ib, &bv) in b.iter().enumerate() {
                psi[ia * d + ib] = av * bv;
            }
        }
        parts.push((w / total, QuantumState::from_pure(psi, trunc)?));
    }
    QuantumState::blend(parts)
}

fn random_unit_vector(dim: usize, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// `p·ρ + (1−p)·𝟙/d` on the truncated space. `p = 1` returns the input
/// unchanged and `p = 0` the maximally mixed state.
pub fn mix_white_noise(state: QuantumState, p: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("noise weight p={p} outside [0, 1]")));
    }
    if p == 1.0 {
        return Ok(state);
    }
    let trunc = state.truncation();
    if p == 0.0 {
        return Ok(QuantumState::maximally_mixed(trunc));
    }
    QuantumState::blend(vec![(p, state), (1.0 - p, QuantumState::maximally_mixed(trunc))])
}

/// Balanced per-beam photon loss with transmissions `eta_a`, `eta_b` applied
/// to both polarization modes of the respective beam. The channel is kept
/// symbolic: expectations evaluate it in the Heisenberg picture and count
/// distributions by binomial thinning, so large truncations stay usable.
/// `eta = 1` on both beams returns the input unchanged.
pub fn apply_loss(state: QuantumState, eta_a: f64, eta_b: f64) -> Result<QuantumState> {
    QuantumState::lossy(state, eta_a, eta_b)
}

/// Applies the same 2×2 polarization-basis change to both beams
/// (`c_i = Σ_j u[i][j] a_j` on each beam). Pure states stay pure; other
/// forms are materialized, so this is intended for diagnostics at small
/// truncation.
pub fn rotate_polarization(state: &QuantumState, u: &[[Complex64; 2]; 2]) -> Result<QuantumState> {
    let trunc = state.truncation();
    let w = mode_rotation(u, &trunc);
    let d = trunc.beam_dim();
    if let Some(psi) = state.as_pure() {
        // ψ' = (W ⊗ W) ψ, via the beam-index reshape: Ψ' = W Ψ Wᵀ.
        let mut t = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (r, m, v) in w.iter() {
            for j in 0..d {
                t[r * d + j] += v * psi[m * d + j];
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (y, j, v) in w.iter() {
            for x in 0..d {
                out[x * d + y] += t[x * d + j] * v;
            }
        }
        return QuantumState::from_pure(out, trunc).map(|s| s.with_tail_mass(state.tail_mass()));
    }
    let rho = state.to_density_matrix()?;
    let u_full = w.kron(&w);
    let dim = rho.nrows();
    let mut t = nalgebra::DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for j in 0..dim {
        let col: Vec<Complex64> = rho.column(j).iter().copied().collect();
        for (i, val) in u_full.apply(&col).into_iter().enumerate() {
            t[(i, j)] = val;
        }
    }
    let mut out = nalgebra::DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (r, c, v) in u_full.iter() {
        let vc = v.conj();
        for i in 0..dim {
            out[(i, r)] += t[(i, c)] * vc;
        }
    }
    QuantumState::from_density_matrix(out, trunc).map(|s| s.with_tail_mass(state.tail_mass()))
}

/// A parsed state description: one family plus ordered post-modifiers,
/// e.g. `bsv(gain=0.8)+noise(p=0.9)+loss(etaA=0.7,etaB=1.0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub family: StateFamily,
    pub modifiers: Vec<StateModifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    Bsv { gain: f64 },
    Singlet { n: u32 },
    Sep { seed: u64, terms: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateModifier {
    Noise { p: f64 },
    Loss { eta_a: f64, eta_b: f64 },
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self> {
        parse_state_spec(text)
    }

    pub fn build(&self, trunc: Truncation) -> Result<QuantumState> {
        let mut state = match self.family {
            StateFamily::Bsv { gain } => bsv(gain, trunc)?,
            StateFamily::Singlet { n } => singlet_sector(n, trunc)?,
            StateFamily::Sep { seed, terms } => random_separable(seed, terms, trunc)?,
        };
        for m in &self.modifiers {
            state = match *m {
                StateModifier::Noise { p } => mix_white_noise(state, p)?,
                StateModifier::Loss { eta_a, eta_b } => apply_loss(state, eta_a, eta_b)?,
            };
        }
        Ok(state)
    }

    /// Real-valued sweepable parameters: `gain`, `p`, `etaA`, `etaB`.
    /// Setting `p` (resp. an eta) targets the last noise (resp. loss)
    /// modifier, appending one if the expression has none, so the swept
    /// knob is always the outermost of its kind.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut spec = self.clone();
        match name {
            "gain" => match &mut spec.family {
                StateFamily::Bsv { gain } => *gain = value,
                _ => {
                    return Err(Error::SpecParse {
                        token: name.into(),
                        reason: "gain only applies to the bsv family".into(),
                    })
                }
            },
            "p" => {
                match spec.modifiers.iter_mut().rev().find_map(|m| match m {
                    StateModifier::Noise { p } => Some(p),
                    _ => None,
                }) {
                    Some(p) => *p = value,
                    None => spec.modifiers.push(StateModifier::Noise { p: value }),
                }
            }
            "etaA" | "etaB" => {
                let pick_a = name == "etaA";
                match spec.modifiers.iter_mut().rev().find_map(|m| match m {
                    StateModifier::Loss { eta_a, eta_b } => {
                        Some(if pick_a { eta_a } else { eta_b })
                    }
                    _ => None,
                }) {
                    Some(eta) => *eta = value,
                    None => spec.modifiers.push(StateModifier::Loss {
                        eta_a: if pick_a { value } else { 1.0 },
                        eta_b: if pick_a { 1.0 } else { value },
                    }),
                }
            }
            other => {
                return Err(Error::SpecParse {
                    token: other.into(),
                    reason: "unknown sweep parameter (expected gain, p, etaA, or etaB)".into(),
                })
            }
        }
        Ok(spec)
    }
}

impl std::fmt::Display for StateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            StateFamily::Bsv { gain } => write!(f, "bsv(gain={gain})")?,
            StateFamily::Singlet { n } => write!(f, "singlet(n={n})")?,
            StateFamily::Sep { seed, terms } => write!(f, "sep(seed={seed},terms={terms})")?,
        }
        for m in &self.modifiers {
            match *m {
                StateModifier::Noise { p } => write!(f, "+noise(p={p})")?,
                StateModifier::Loss { eta_a, eta_b } => {
                    write!(f, "+loss(etaA={eta_a},etaB={eta_b})")?
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_state_spec(s)
    }
}

/// Parses the state grammar
/// `family(args)[+modifier(args)]*` with families `bsv(gain=…)`,
/// `singlet(n=…)`, `sep(seed=…,terms=…)` and modifiers `noise(p=…)`,
/// `loss(etaA=…[,etaB=…])` (omitted transmissions default to 1).
pub fn parse_state_spec(text: &str) -> Result<StateSpec> {
    let segments = split_top_level(text)?;
    let (first, rest) = segments.split_first().ok_or_else(|| Error::SpecParse {
        token: text.trim().into(),
        reason: "empty state spec".into(),
    })?;

    let (name, args) = parse_segment(first)?;
    let family = match name.as_str() {
        "bsv" => StateFamily::Bsv { gain: require_f64(&args, "gain", first)? },
        "singlet" => StateFamily::Singlet { n: require_u64(&args, "n", first)? as u32 },
        "sep" => StateFamily::Sep {
            seed: require_u64(&args, "seed", first)?,
            terms: require_u64(&args, "terms", first)? as usize,
        },
        other => {
            return Err(Error::SpecParse {
                token: other.into(),
                reason: "unknown state family (expected bsv, singlet, or sep)".into(),
            })
        }
    };
    reject_unknown_keys(&args, &family_keys(&name), &name)?;

    let mut modifiers = Vec::new();
    for seg in rest {
        let (name, args) = parse_segment(seg)?;
        let modifier = match name.as_str() {
            "noise" => StateModifier::Noise { p: require_f64(&args, "p", seg)? },
            "loss" => StateModifier::Loss {
                eta_a: optional_f64(&args, "etaA")?.unwrap_or(1.0),
                eta_b: optional_f64(&args, "etaB")?.unwrap_or(1.0),
            },
            other => {
                return Err(Error::SpecParse {
                    token: other.into(),
                    reason: "unknown modifier (expected noise or loss)".into(),
                })
            }
        };
        reject_unknown_keys(&args, &family_keys(&name), &name)?;
        modifiers.push(modifier);
    }
    Ok(StateSpec { family, modifiers })
}

fn family_keys(name: &str) -> Vec<&'static str> {
    match name {
        "bsv" => vec!["gain"],
        "singlet" => vec!["n"],
        "sep" => vec!["seed", "terms"],
        "noise" => vec!["p"],
        "loss" => vec!["etaA", "etaB"],
        _ => vec![],
    }
}

/// Splits on `+` outside parentheses, so float exponents inside argument
/// lists stay intact.
fn split_top_level(text: &str) -> Result<Vec<String>> {
    let mut segments = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::SpecParse {
                        token: text.trim().into(),
                        reason: "unbalanced parentheses".into(),
                    });
                }
                current.push(ch);
            }
            '+' if depth == 0 => {
                segments.push(std::mem::take(&mut current));
            }
            _ => current.push(ch),
        }
    }
    if depth != 0 {
        return Err(Error::SpecParse {
            token: text.trim().into(),
            reason: "unbalanced parentheses".into(),
        });
    }
    segments.push(current);
    Ok(segments.into_iter().map(|s| s.trim().to_string()).collect())
}

/// `name(k=v,…)` → (name, [(k, v)…]).
fn parse_segment(seg: &str) -> Result<(String, Vec<(String, String)>)> {
    let seg = seg.trim();
    let open = seg.find('(');
    let (name, arg_text) = match open {
        Some(i) => {
            let inner = seg[i + 1..].strip_suffix(')').ok_or_else(|| Error::SpecParse {
                token: seg.into(),
                reason: "missing closing parenthesis".into(),
            })?;
            (&seg[..i], inner)
        }
        None => {
            return Err(Error::SpecParse {
                token: seg.into(),
                reason: "expected name(arguments)".into(),
            })
        }
    };
    let mut args = Vec::new();
    for pair in arg_text.split(',') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::SpecParse {
            token: pair.into(),
            reason: "expected key=value".into(),
        })?;
        args.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((name.trim().to_string(), args))
}

fn lookup<'a>(args: &'a [(String, String)], key: &str) -> Option<&'a str> {
    args.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn require_f64(args: &[(String, String)], key: &str, ctx: &str) -> Result<f64> {
    optional_f64(args, key)?.ok_or_else(|| Error::SpecParse {
        token: ctx.into(),
        reason: format!("missing required argument `{key}`"),
    })
}

fn optional_f64(args: &[(String, String)], key: &str) -> Result<Option<f64>> {
    lookup(args, key)
        .map(|v| {
            v.parse::<f64>().map_err(|_| Error::SpecParse {
                token: v.into(),
                reason: format!("`{key}` is not a number"),
            })
        })
        .transpose()
}

fn require_u64(args: &[(String, String)], key: &str, ctx: &str) -> Result<u64> {
    let v = lookup(args, key).ok_or_else(|| Error::SpecParse {
        token: ctx.into(),
        reason: format!("missing required argument `{key}`"),
    })?;
    v.parse::<u64>().map_err(|_| Error::SpecParse {
        token: v.into(),
        reason: format!("`{key}` is not a nonnegative integer"),
    })
}

fn reject_unknown_keys(args: &[(String, String)], known: &[&str], ctx: &str) -> Result<()> {
    for (k, _) in args {
        if !known.contains(&k.as_str()) {
            return Err(Error::SpecParse {
                token: k.clone(),
                reason: format!("unknown argument for `{ctx}`"),
            });
        }
    }
    Ok(())
}
