//! Verification grids over `(p, s, lambda)` cells, and the sampled p-adic suites.

use std::borrow::Cow;
use std::collections::BTreeSet;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::connections::{check_dynamical, check_qkz_cleared, check_qkz_rational_form};
use crate::dwork::{
    check_dwork_first, check_dwork_second, check_dwork_shifted, check_dwork_vector,
};
use crate::error::{Error, Result};
use crate::hypergeometric::{
    check_digit_polys_nonvanishing, check_factorization, digit_poly_table, family_closed_form,
    lambda_level, lambda_range, FamilyCache, SolutionFamily, DEFAULT_DEGREE_BUDGET,
};
use crate::padic::{
    consecutive_gap, count_nonvanishing, intersection_degree, intersection_product,
    sample_admissible, verify_bundle_invariance, verify_limit_relations, DomainOracle, PadicElem,
    Unramified,
};
use crate::report::{sort_records, CheckRecord, ModulusExponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Construction,
    Factor,
    Dynamical,
    Qkz,
    Dwork,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Construction,
        Suite::Factor,
        Suite::Dynamical,
        Suite::Qkz,
        Suite::Dwork,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Construction => "construction",
            Suite::Factor => "factor",
            Suite::Dynamical => "dynamical",
            Suite::Qkz => "qkz",
            Suite::Dwork => "dwork",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridConfig {
    pub primes: Vec<u64>,
    /// Highest level; per-prime defaults apply when absent.
    pub s_max: Option<u32>,
    pub budget: u64,
    /// Add 1 to one coefficient of `I_{s,1}` in every family before checking.
    pub perturb: bool,
    /// Fill `runtime_ms` with the wall time of each cell.
    pub timings: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            primes: vec![3, 5, 7],
            s_max: None,
            budget: DEFAULT_DEGREE_BUDGET,
            perturb: false,
            timings: false,
        }
    }
}

impl GridConfig {
    /// `4` for `p = 3`, `3` otherwise, unless overridden.
    pub fn s_max_for(&self, p: u64) -> u32 {
        self.s_max.unwrap_or(if p == 3 { 4 } else { 3 })
    }
}

struct Prepared {
    p: u64,
    s_max: u32,
    cache: FamilyCache,
    perturb: bool,
    timings: bool,
}

impl Prepared {
    fn get(&self, s: u32, lambda: i64) -> Result<Cow<'_, SolutionFamily>> {
        let f = self.cache.get(s, lambda).ok_or_else(|| {
            Error::InvalidParameter(format!("family ({}, {s}, {lambda}) not prepared", self.p))
        })?;
        Ok(if self.perturb {
            Cow::Owned(f.perturbed())
        } else {
            Cow::Borrowed(f)
        })
    }
}

fn timed(on: bool, f: impl FnOnce() -> Result<Vec<CheckRecord>>) -> Result<Vec<CheckRecord>> {
    let start = Instant::now();
    let mut recs = f()?;
    if on {
        let ms = start.elapsed().as_millis() as u64;
        for r in recs.iter_mut() {
            r.runtime_ms = Some(ms);
        }
    }
    Ok(recs)
}

fn levels_cells(p: u64, s_max: u32) -> Result<Vec<(u32, i64)>> {
    let mut out = Vec::new();
    for s in 1..=s_max {
        for l in lambda_range(p, s)? {
            out.push((s, l));
        }
    }
    Ok(out)
}

fn cells_for(suite: Suite, p: u64, s_max: u32) -> Result<BTreeSet<(u32, i64)>> {
    let mut cells = BTreeSet::new();
    match suite {
        Suite::Construction | Suite::Factor | Suite::Dynamical => {
            cells.extend(levels_cells(p, s_max)?);
        }
        Suite::Qkz => cells.extend(levels_cells(p, s_max)?),
        Suite::Dwork => {
            for e in 1..=2u32 {
                for l in lambda_range(p, e)? {
                    for s in e..=s_max {
                        cells.insert((s, l));
                        if lambda_level(p, l + 2) <= s {
                            cells.insert((s, l + 2));
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn prepare(p: u64, suites: &[Suite], cfg: &GridConfig) -> Result<Prepared> {
    let s_max = cfg.s_max_for(p);
    let mut cells = BTreeSet::new();
    for suite in suites {
        if *suite != Suite::Construction {
            cells.extend(cells_for(*suite, p, s_max)?);
        }
    }
    let cells: Vec<_> = cells.into_iter().collect();
    Ok(Prepared {
        p,
        s_max,
        cache: FamilyCache::build(p, &cells, cfg.budget)?,
        perturb: cfg.perturb,
        timings: cfg.timings,
    })
}

fn run_construction(p: u64, cfg: &GridConfig) -> Result<Vec<CheckRecord>> {
    let s_max = cfg.s_max_for(p);
    let cells = levels_cells(p, s_max)?;
    // direct expansion is the oracle here, whatever the budget
    let cache = FamilyCache::build(p, &cells, u64::MAX)?;
    cells
        .par_iter()
        .map(|&(s, l)| {
            timed(cfg.timings, || {
                let direct = cache.get(s, l).expect("built");
                let direct = if cfg.perturb {
                    Cow::Owned(direct.perturbed())
                } else {
                    Cow::Borrowed(direct)
                };
                let closed = family_closed_form(p, s, l)?;
                let params = [("p", p as i64), ("s", s as i64), ("lambda", l)];
                Ok(vec![
                    CheckRecord::predicate("closed_form_equals_direct", &params, closed == *direct),
                    CheckRecord::predicate(
                        "gradient_identity",
                        &params,
                        direct.gradient_identity_holds(),
                    ),
                    CheckRecord::predicate("degrees", &params, direct.degrees_consistent()),
                ])
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

fn run_factor(prep: &Prepared) -> Result<Vec<CheckRecord>> {
    let table = digit_poly_table(prep.p)?;
    let cells = levels_cells(prep.p, prep.s_max)?;
    let mut out: Vec<CheckRecord> = cells
        .par_iter()
        .map(|&(s, l)| {
            timed(prep.timings, || {
                check_factorization(&*prep.get(s, l)?, &table)
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.extend(check_digit_polys_nonvanishing(prep.p)?);
    Ok(out)
}

fn run_dynamical(prep: &Prepared) -> Result<Vec<CheckRecord>> {
    let cells = levels_cells(prep.p, prep.s_max)?;
    Ok(cells
        .par_iter()
        .map(|&(s, l)| timed(prep.timings, || prep.get(s, l).map(|f| check_dynamical(&f))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

fn run_qkz(prep: &Prepared) -> Result<Vec<CheckRecord>> {
    let p = prep.p;
    let mut cleared_cells = Vec::new();
    for s in 1..=prep.s_max {
        for l in lambda_range(p, s)? {
            if lambda_level(p, l + 2) <= s {
                cleared_cells.push((s, l));
            }
        }
    }
    let mut rational_cells = Vec::new();
    for e in 1..=2u32 {
        for l in lambda_range(p, e)? {
            if lambda_level(p, l + 2) > e {
                continue;
            }
            for s in e + 1..=prep.s_max {
                rational_cells.push((e, s, l));
            }
        }
    }
    let mut out: Vec<CheckRecord> = cleared_cells
        .par_iter()
        .map(|&(s, l)| {
            timed(prep.timings, || {
                check_qkz_cleared(&*prep.get(s, l)?, &*prep.get(s, l + 2)?)
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let rational: Vec<CheckRecord> = rational_cells
        .par_iter()
        .map(|&(e, s, l)| {
            timed(prep.timings, || {
                let at = prep.get(s, l)?;
                let shifted = prep.get(s, l + 2)?;
                let cleared = check_qkz_cleared(&at, &shifted)?;
                let rational = check_qkz_rational_form(&at, &shifted, e)?;
                let implied = cleared
                    .iter()
                    .zip(&rational)
                    .all(|(c, q)| !c.pass || q.pass);
                let mut v = rational;
                v.push(CheckRecord::predicate(
                    "qkz_implication",
                    &[
                        ("p", p as i64),
                        ("s", s as i64),
                        ("e", e as i64),
                        ("lambda", l),
                    ],
                    implied,
                ));
                Ok(v)
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.extend(rational);
    Ok(out)
}

fn dwork_cell(prep: &Prepared, e: u32, s: u32, l: i64) -> Result<Vec<CheckRecord>> {
    let p = prep.p;
    let (u, lo) = (prep.get(s, l)?, prep.get(s - 1, l)?);
    let mut out = Vec::new();
    let params = [
        ("p", p as i64),
        ("s", s as i64),
        ("e", e as i64),
        ("lambda", l),
    ];
    for j in 0..2 {
        let first = check_dwork_first(&u, &lo, e, j)?;
        let vector = check_dwork_vector(&u, &lo, e, j)?;
        let cap = s - 1;
        let agree =
            first.observed.map(|o| o.min_with(cap)) == vector[0].observed.map(|o| o.min_with(cap));
        let mut cp = params.to_vec();
        cp.push(("j", j as i64 + 1));
        out.push(CheckRecord::predicate(
            "dwork_gradient_crosscheck",
            &cp,
            agree,
        ));
        out.push(first);
        out.extend(vector);
    }
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        out.push(check_dwork_second(&u, &lo, e, i, j)?);
    }
    let sym = check_dwork_second(&u, &lo, e, 0, 1)?.observed
        == check_dwork_second(&u, &lo, e, 1, 0)?.observed;
    out.push(CheckRecord::predicate(
        "dwork_second_symmetry",
        &params,
        sym,
    ));
    if lambda_level(p, l + 2) <= e && s > 2 * e {
        out.extend(check_dwork_shifted(
            &u,
            &lo,
            &*prep.get(s, l + 2)?,
            &*prep.get(s - 1, l + 2)?,
            e,
        )?);
    }
    Ok(out)
}

fn run_dwork(prep: &Prepared) -> Result<Vec<CheckRecord>> {
    let p = prep.p;
    let mut cells = Vec::new();
    for e in 1..=2u32 {
        for l in lambda_range(p, e)? {
            for s in e + 1..=prep.s_max {
                cells.push((e, s, l));
            }
        }
    }
    Ok(cells
        .par_iter()
        .map(|&(e, s, l)| timed(prep.timings, || dwork_cell(prep, e, s, l)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

/// Run the given suites over every prime in `cfg`; records come back sorted.
pub fn run_suites(suites: &[Suite], cfg: &GridConfig) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        if suites.contains(&Suite::Construction) {
            out.extend(run_construction(p, cfg)?);
        }
        let rest: Vec<Suite> = suites
            .iter()
            .copied()
            .filter(|s| *s != Suite::Construction)
            .collect();
        if rest.is_empty() {
            continue;
        }
        let prep = prepare(p, &rest, cfg)?;
        for suite in rest {
            out.extend(match suite {
                Suite::Factor => run_factor(&prep)?,
                Suite::Dynamical => run_dynamical(&prep)?,
                Suite::Qkz => run_qkz(&prep)?,
                Suite::Dwork => run_dwork(&prep)?,
                Suite::Construction => unreachable!(),
            });
        }
    }
    sort_records(&mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleConfig {
    pub p: u64,
    pub m: u32,
    pub precision: u32,
    pub lambdas: Vec<i64>,
    pub samples: usize,
    pub seed: u64,
}

/// Sampled invariance and limit-relation checks per `lambda`, plus the exhaustive
/// count for the intersection product.
pub fn run_bundle(cfg: &BundleConfig) -> Result<Vec<CheckRecord>> {
    let ctx = Unramified::new(cfg.p, cfg.m, cfg.precision)?;
    let oracle = DomainOracle::new(ctx.residue_field())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut jobs: Vec<(i64, usize, [PadicElem; 2])> = Vec::new();
    let mut out = Vec::new();
    for &l in &cfg.lambdas {
        let pts = sample_admissible(&ctx, &oracle, l, cfg.samples, &mut rng)?;
        out.push(
            CheckRecord::predicate(
                "bundle_samples",
                &[("p", cfg.p as i64), ("m", cfg.m as i64), ("lambda", l)],
                pts.len() >= cfg.samples,
            )
            .with_detail(format!("{} admissible points sampled", pts.len())),
        );
        jobs.extend(pts.into_iter().enumerate().map(|(k, a)| (l, k, a)));
    }
    let checked: Vec<CheckRecord> = jobs
        .par_iter()
        .map(|(l, k, a)| {
            let mut recs = verify_bundle_invariance(&oracle, *l, a)?;
            recs.extend(verify_limit_relations(&oracle, *l, a)?);
            for r in recs.iter_mut() {
                r.params.insert("sample".into(), *k as i64);
            }
            Ok(recs)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.extend(checked);

    let b = intersection_product(cfg.p)?;
    let count = count_nonvanishing(ctx.residue_field(), &b)?;
    let params = [("p", cfg.p as i64), ("m", cfg.m as i64)];
    out.push(
        CheckRecord::predicate(
            "intersection_degree",
            &params,
            count.degree as u64 == intersection_degree(cfg.p)
                && intersection_degree(cfg.p) < cfg.p.pow(3) - 1,
        )
        .with_detail(format!("degree {}", count.degree)),
    );
    let nonempty = count.count >= 1;
    let mut rec = CheckRecord::predicate(
        "intersection_count",
        &params,
        nonempty && (cfg.m < 3 || count.pass),
    );
    rec = rec.with_detail(match count.bound {
        Some(b) => format!("{} points, bound {b}", count.count),
        None => format!("{} points, bound not applicable", count.count),
    });
    out.push(rec);
    sort_records(&mut out);
    Ok(out)
}

/// `I_s/T_s - I_{s-1}/T_{s-1}` has valuation at least `s - e` at sampled points of the domain.
pub fn run_convergence(
    p: u64,
    m: u32,
    lambdas: &[i64],
    samples: usize,
    s_max: u32,
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let ctx = Unramified::new(p, m, s_max)?;
    let oracle = DomainOracle::new(ctx.residue_field())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for &l in lambdas {
        let mut residues =
            crate::padic::bundle::residue_points(&oracle, |pt| Ok(oracle.flags(pt, l)?.in_domain))?;
        if residues.is_empty() {
            return Err(Error::OutsideDomain(format!(
                "no residue points in the domain for lambda = {l}"
            )));
        }
        use rand::seq::SliceRandom;
        residues.shuffle(&mut rng);
        for k in 0..samples {
            let r = &residues[k % residues.len()];
            let a = [
                ctx.random_in_disc(&r[0], &mut rng),
                ctx.random_in_disc(&r[1], &mut rng),
            ];
            jobs.push((l, k, a));
        }
    }
    let mut out: Vec<CheckRecord> = jobs
        .par_iter()
        .map(|(l, k, a)| {
            let e = lambda_level(p, *l);
            (e + 1..=s_max)
                .map(|s| {
                    let gap = consecutive_gap(s, *l, a)?;
                    let observed = if gap >= ctx.precision() {
                        ModulusExponent::Infinite
                    } else {
                        ModulusExponent::Finite(gap)
                    };
                    Ok(CheckRecord::congruence(
                        "convergence",
                        &[
                            ("p", p as i64),
                            ("m", m as i64),
                            ("lambda", *l),
                            ("s", s as i64),
                            ("sample", *k as i64),
                        ],
                        s - e,
                        observed,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    sort_records(&mut out);
    Ok(out)
}
