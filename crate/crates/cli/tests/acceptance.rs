//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::process::Command;
use std::time::{Duration, Instant};

use catpurify::catlabel::{mxor, CatLabel};
use catpurify::ensemble::{block_step, block_yield, werner_single, SingleDistribution};
use catpurify::hashing::sim::{
    decode_amplitudes, run_trials, simulate_hashing, Decode, HashingParams,
};
use catpurify::hashing::{
    multiparty_hashing_yield, two_party_hashing_yield, werner_hashing_yield,
    werner_hashing_yield_limit,
};
use catpurify::oracle::{
    build_cat_state, eigenvalue_sign, stabilizer_generators, verify_conjugation_rules, verify_mxor,
    MATRIX_TOL,
};
use catpurify::strategy::{
    block_then_hashing, find_knee, recurrence_then_hashing, RecurrenceVariant,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Reference zeros, computed independently in extended precision.
const TWO_PARTY_HASHING_ZERO: f64 = 0.810_710_375_084_768_2;
const WERNER_HASHING_ZERO_N2: f64 = 0.834_958_203_342_460_7;
const H2_INV_HALF: f64 = 0.110_027_864_438_359_55;

/// Node budget per decode for the m = 2000 run. Exact decoding at this size
/// cannot finish within any practical budget, so this only bounds runtime.
const LARGE_BLOCK_SEARCH_NODES: u64 = 1 << 15;

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {:.1?}, limit {:?}", t, limit))
    } else {
        Ok(t)
    }
}

fn c1_mxor_oracle() -> Outcome {
    let start = Instant::now();
    let r2 = verify_mxor(2).map_err(|e| e.to_string())?;
    let r3 = verify_mxor(3).map_err(|e| e.to_string())?;
    let t = within(Duration::from_secs(10), start)?;
    if r2.pairs.len() != 16 || r3.pairs.len() != 64 || !r2.all_pass() || !r3.all_pass() {
        return Err(format!(
            "N=2 {}/{}, N=3 {}/{}",
            r2.passed(),
            r2.pairs.len(),
            r3.passed(),
            r3.pairs.len()
        ));
    }
    Ok(format!("16/16 and 64/64 pairs in {t:.2?}"))
}

fn c2_conjugation() -> Outcome {
    let checks = verify_conjugation_rules();
    let worst = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    if checks.len() == 4 && checks.iter().all(|c| c.pass) && worst <= MATRIX_TOL {
        Ok(format!("4 mappings exact, max deviation {worst:e}"))
    } else {
        Err(format!("max deviation {worst:e}"))
    }
}

fn c3_eigenvalues() -> Outcome {
    let mut checked = 0;
    for n in 2..=3 {
        for label in CatLabel::all(n).unwrap() {
            let psi = build_cat_state(label).map_err(|e| e.to_string())?;
            let bits: Vec<bool> = std::iter::once(label.phase())
                .chain(label.amplitudes())
                .collect();
            for (g, bit) in stabilizer_generators(label).into_iter().zip(bits) {
                let mut op = g.clone();
                op.negative = false;
                let want = if bit { -1.0 } else { 1.0 };
                let got = eigenvalue_sign(&op, &psi, 1e-10).map_err(|e| e.to_string())?;
                if got != Some(want) {
                    return Err(format!("{label}: {op} gives {got:?}, expected {want}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} eigenvalue checks"))
}

/// Literal replay of the block protocol on every tuple of labels.
fn brute_block(single: &SingleDistribution, m: usize) -> (f64, HashMap<Vec<CatLabel>, f64>) {
    let labels = CatLabel::all(single.n_parties()).unwrap();
    let d = labels.len();
    let mut out: HashMap<Vec<CatLabel>, f64> = HashMap::new();
    let mut p_pass = 0.0;
    for code in 0..d.pow(m as u32) {
        let mut cur: Vec<CatLabel> = (0..m)
            .map(|k| labels[(code / d.pow(k as u32)) % d])
            .collect();
        let p: f64 = cur.iter().map(|l| single.prob(*l)).product();
        if p == 0.0 {
            continue;
        }
        for s in 0..m - 1 {
            let (a, b) = mxor(cur[s], cur[m - 1]).unwrap();
            cur[s] = a;
            cur[m - 1] = b;
        }
        if cur[m - 1].amplitudes().iter().all(|&b| !b) {
            cur.truncate(m - 1);
            p_pass += p;
            *out.entry(cur).or_default() += p;
        }
    }
    out.values_mut().for_each(|v| *v /= p_pass);
    (p_pass, out)
}

fn c4_ensemble_brute_force() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)];
    for (n, m) in cases {
        for f in [0.7, 0.9] {
            let single = werner_single(n, f).unwrap();
            let (p_ref, dist) = brute_block(&single, m);
            let step = block_step(&single, m).map_err(|e| e.to_string())?;
            worst = worst.max((step.p_pass - p_ref).abs());
            let passed = step.passed.ok_or("no passed distribution")?;
            for (idx, &p) in passed.probs().iter().enumerate() {
                let want = dist.get(&passed.labels_at(idx)).copied().unwrap_or(0.0);
                worst = worst.max((p - want).abs());
            }
        }
    }
    if worst <= 1e-12 {
        Ok(format!(
            "{} cases, max entry error {worst:e}",
            cases.len() * 2
        ))
    } else {
        Err(format!("max entry error {worst:e}"))
    }
}

fn c5_endpoints() -> Outcome {
    for n in 2..=4 {
        let y = werner_hashing_yield(n, 1.0).map_err(|e| e.to_string())?;
        if y != 1.0 {
            return Err(format!("D_W({n}, 1) = {y}"));
        }
    }
    let y = werner_hashing_yield_limit(1.0).map_err(|e| e.to_string())?;
    if y != 1.0 {
        return Err(format!("limit at f=1 is {y}"));
    }
    for m in 2..=6 {
        let y = block_yield(&werner_single(2, 1.0).unwrap(), m).map_err(|e| e.to_string())?;
        if y != (m - 1) as f64 / m as f64 {
            return Err(format!("block{m} at f=1 is {y}"));
        }
    }
    Ok("D_W(N,1) = 1 for N = 2,3,4,inf; block yields (m-1)/m for m = 2..6".into())
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c6_thresholds() -> Outcome {
    let two = bisect(
        |f| two_party_hashing_yield(&werner_single(2, f).unwrap()).unwrap(),
        0.5,
        1.0,
        1e-6,
    );
    let dw2 = bisect(|f| werner_hashing_yield(2, f).unwrap(), 0.5, 1.0, 1e-6);
    let implied = 1.0 - 1.5 * H2_INV_HALF;
    if (two - 0.8107).abs() > 1e-3 || (two - TWO_PARTY_HASHING_ZERO).abs() > 1e-4 {
        return Err(format!("1 - H(W_f) crosses zero at {two}"));
    }
    if (dw2 - WERNER_HASHING_ZERO_N2).abs() > 1e-4 || (dw2 - implied).abs() > 1e-4 {
        return Err(format!(
            "D_W(2, f) crosses zero at {dw2}, expected {implied}"
        ));
    }
    Ok(format!("two-party zero {two:.6}, D_W(2) zero {dw2:.6}"))
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| (lo + k as f64 * step).min(hi)).collect()
}

fn c7_recurrence_curves() -> Outcome {
    let start = Instant::now();
    let rot = RecurrenceVariant::Rotation;
    let g = grid(0.5, 1.0, 0.001);
    let mut improve = Vec::new();
    let mut b5_best = Vec::new();
    let mut b7_worse = Vec::new();
    let mut rounds = Vec::new();
    for &f in &g {
        let (rec, r) = recurrence_then_hashing(f, 20, rot).map_err(|e| e.to_string())?;
        let b = |m| block_then_hashing(f, m).map_err(|e| e.to_string());
        let (b3, b4, b5, b7) = (b(3)?, b(4)?, b(5)?, b(7)?);
        if b3.max(b4) > rec {
            improve.push(f);
        }
        if b5 > rec && b5 > b3 && b5 > b4 {
            b5_best.push(f);
        }
        if b7 > rec + 1e-9 {
            b7_worse.push(f);
        }
        rounds.push(r);
    }
    let knee = find_knee(20, rot).map_err(|e| e.to_string())?;
    within(Duration::from_secs(300), start)?;

    let mut notes = Vec::new();
    if improve.is_empty() {
        notes.push("(a) no improvement region".to_string());
    }
    if !b5_best.is_empty() {
        notes.push(format!(
            "(b) block5 uniquely best at {:?}",
            &b5_best[..b5_best.len().min(3)]
        ));
    }
    if !b7_worse.is_empty() {
        notes.push(format!(
            "(c) block7 above rec-hash at {:?}",
            &b7_worse[..b7_worse.len().min(3)]
        ));
    }
    match knee {
        Some(k) if k > 0.5 && k < 1.0 => {
            let bad = g.iter().zip(&rounds).any(|(&f, &r)| f >= k && r != 0);
            let below = recurrence_then_hashing(k - 0.01, 20, rot)
                .map_err(|e| e.to_string())?
                .1;
            if bad || below == 0 {
                notes.push(format!("(d) knee {k} is not a clean switch"));
            }
        }
        other => notes.push(format!("(d) knee {other:?}")),
    }
    if notes.is_empty() {
        Ok(format!(
            "improvement region [{:.3}, {:.3}], knee {:.4}, {:.1?}",
            improve[0],
            improve[improve.len() - 1],
            knee.unwrap(),
            start.elapsed()
        ))
    } else {
        Err(notes.join("; "))
    }
}

fn c8_multiparty_curves() -> Outcome {
    let g = grid(0.5, 1.0, 0.001);
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
    for n in 2..=4 {
        let v: Vec<f64> = g
            .iter()
            .map(|&f| werner_hashing_yield(n, f).unwrap())
            .collect();
        if !monotone(&v) {
            return Err(format!("D_W({n}, f) not monotone"));
        }
    }
    let inf: Vec<f64> = g
        .iter()
        .map(|&f| werner_hashing_yield_limit(f).unwrap())
        .collect();
    if !monotone(&inf) {
        return Err("limit curve not monotone".into());
    }
    for &f in &g {
        let w = werner_single(2, f).unwrap();
        let separate = multiparty_hashing_yield(&w);
        let joint = two_party_hashing_yield(&w).unwrap();
        if separate > joint + 1e-12 {
            return Err(format!("separate-string hashing above 1 - H at f = {f}"));
        }
    }
    for f in [0.85, 0.9, 0.95] {
        let lim = werner_hashing_yield_limit(f).unwrap();
        let seq: Vec<f64> = (2..=24)
            .map(|n| werner_hashing_yield(n, f).unwrap())
            .collect();
        // the per-string flip probability falls toward (1-f)/2 as N grows
        if !seq.windows(2).all(|w| w[1] >= w[0]) || seq.iter().any(|&d| d > lim + 1e-12) {
            return Err(format!("D_W(N, {f}) does not rise to the limit"));
        }
        if (seq[seq.len() - 1] - lim).abs() > 1e-5 {
            return Err(format!("D_W(24, {f}) far from the limit"));
        }
    }
    Ok("monotone curves, separate-string bound, convergence in N".into())
}

fn c9_monte_carlo() -> Outcome {
    let start = Instant::now();
    let (n, m, f, safety, trials) = (3, 2000, 0.9, 20, 100);
    let single = werner_single(n, f).unwrap();
    let params = HashingParams::new(n, m)
        .with_safety_bits(safety)
        .with_search_nodes(LARGE_BLOCK_SEARCH_NODES);
    let outcomes = run_trials(&params, &single, 7, trials).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rate = outcomes.iter().filter(|o| o.success).count() as f64 / trials as f64;
    let mean = outcomes.iter().map(|o| o.empirical_yield).sum::<f64>() / trials as f64;
    let target = werner_hashing_yield(n, f).unwrap() - 2.0 * safety as f64 / m as f64;
    let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &outcomes {
        *reasons
            .entry(o.failure.map_or("none", |r| r.as_str()))
            .or_default() += 1;
    }
    let summary = format!(
        "success {rate:.2}, mean yield {mean:.4} vs {target:.4}, outcomes {reasons:?}, {elapsed:.1?}"
    );
    if rate >= 0.99 && (mean - target).abs() <= 0.05 && elapsed <= Duration::from_secs(120) {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c10_decoder_oracle() -> Outcome {
    let single = werner_single(2, 0.85).unwrap();
    let params = HashingParams::new(2, 10).with_safety_bits(1);
    let p = single.probs();
    let prior = [p[0] + p[2], p[1] + p[3]];
    let mut unique = 0;
    for seed in 0..50 {
        let run = simulate_hashing(&params, &single, seed)
            .map_err(|e| e.to_string())?
            .run;
        let mut scored = Vec::new();
        for code in 0u32..1 << 10 {
            let x: Vec<u32> = (0..10).map(|i| (code >> i) & 1).collect();
            if run
                .amp_rounds
                .iter()
                .all(|r| r.subset.parity_of(&x) == r.outcome)
            {
                scored.push((x.iter().map(|&b| prior[b as usize].ln()).sum::<f64>(), x));
            }
        }
        let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let optimal: Vec<Vec<u32>> = scored
            .into_iter()
            .filter(|s| s.0 >= best - 1e-9)
            .map(|s| s.1)
            .collect();
        match decode_amplitudes(&run, &single, 1 << 20).map_err(|e| e.to_string())? {
            Decode::Unique(x) if optimal == vec![x.clone()] => unique += 1,
            Decode::Ambiguous if optimal.len() > 1 => {}
            other => {
                return Err(format!(
                    "seed {seed}: decoder {other:?}, enumeration {optimal:?}"
                ))
            }
        }
    }
    Ok(format!(
        "50 runs agree ({unique} unique optima, {} ties)",
        50 - unique
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_catpurify"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn c11_determinism() -> Outcome {
    let curve = [
        "yield-curve",
        "-N",
        "2",
        "--methods",
        "rec-hash,block3,block4,block5",
        "--f",
        "0.5:1.0:0.005",
    ];
    let sim = [
        "simulate-hashing",
        "-N",
        "2",
        "-m",
        "40",
        "-f",
        "0.97",
        "--trials",
        "6",
        "--seed",
        "11",
    ];
    for args in [&curve[..], &sim[..]] {
        let a = run_cli(&[&["--threads", "1"], args].concat())?;
        let b = run_cli(&[&["--threads", "1"], args].concat())?;
        let c = run_cli(&[&["--threads", "4"], args].concat())?;
        if a != b || a != c {
            return Err(format!("{} output differs between runs", args[0]));
        }
    }
    Ok("yield-curve and simulate-hashing byte-identical across runs and 1 vs 4 threads".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("MXOR oracle equivalence", c1_mxor_oracle),
        ("conjugation rules", c2_conjugation),
        ("stabilizer eigenvalues", c3_eigenvalues),
        ("block step vs brute force", c4_ensemble_brute_force),
        ("closed-form endpoints", c5_endpoints),
        ("thresholds by bisection", c6_thresholds),
        ("recurrence and block yield curves", c7_recurrence_curves),
        ("multiparty hashing yield in N", c8_multiparty_curves),
        ("Monte Carlo hashing", c9_monte_carlo),
        ("small-instance decoder oracle", c10_decoder_oracle),
        ("determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
