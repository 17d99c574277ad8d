//! Ground-truth validation of every exploration engine: exact multiset
//! equality of deterministic replays against union-find, and two-sample
//! distributional agreement between on-the-fly walks and materialized
//! instances.

use critwalk::er;
use critwalk::harness;
use critwalk::intersection;
use critwalk::oracle::{self, MaterializedInstance};
use critwalk::quantum;
use critwalk::regular;
use critwalk::rng::derive_stream;
use critwalk::stats::{ks_p_value, ks_statistic, two_sample_chi_square, wilson_interval};
use critwalk::walk::{self, IncrementLaw};

fn shuffled_ordering(n: usize, stream: &mut critwalk::RngStream) -> Vec<u32> {
    let mut ord: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = stream.index(i + 1);
        ord.swap(i, j);
    }
    ord
}

#[test]
fn er_replay_matches_union_find() {
    let mut stream = derive_stream(0xe01, 0);
    for rep in 0..500 {
        let n = 2 + stream.index(63);
        let p = [0.02, 0.1, 0.3, 0.8][stream.index(4)];
        let params = er::ErParams::new(n, 0.0, Some(p)).unwrap();
        let inst = er::materialize(&params, &mut stream).unwrap();
        let truth =
            oracle::union_find_components(&MaterializedInstance::SimpleGraph(inst.clone()))
                .unwrap();
        let ordering = if rep % 2 == 0 {
            er::natural_ordering(n)
        } else {
            shuffled_ordering(n, &mut stream)
        };
        let replay = er::explore_on_graph(&inst, &ordering).unwrap();
        assert_eq!(replay.sorted_sizes(), truth, "rep {rep} n {n} p {p}");
    }
}

#[test]
fn er_explore_law_matches_materialized_law() {
    let n = 30;
    let trials = 100_000u64;
    let params = er::ErParams::new(n, 0.0, None).unwrap();
    let mut walk_counts = vec![0u64; n + 1];
    for i in 0..trials {
        let mut s = derive_stream(0xe02, i);
        walk_counts[er::explore(&params, &mut s).cmax() as usize] += 1;
    }
    let mut graph_counts = vec![0u64; n + 1];
    for i in 0..trials {
        let mut s = derive_stream(0xe03, i);
        let inst = er::materialize(&params, &mut s).unwrap();
        let sizes =
            oracle::union_find_components(&MaterializedInstance::SimpleGraph(inst)).unwrap();
        graph_counts[sizes[0] as usize] += 1;
    }
    let (stat, df, p) = two_sample_chi_square(&walk_counts, &graph_counts, 5.0);
    assert!(p > 0.01, "chi-square stat {stat} df {df} p {p}");
}

#[test]
fn er_enumeration_vs_monte_carlo_tails() {
    // Wilson at z = 4 to keep the 54-cell family sound.
    let trials = 20_000u64;
    for (gi, &(n, p)) in [(3, 0.2), (3, 0.5), (3, 0.8), (4, 0.5), (5, 0.2), (5, 0.8)]
        .iter()
        .enumerate()
    {
        let law = oracle::enumerate_er_cmax(n, p).unwrap();
        let params = er::ErParams::new(n, 0.0, Some(p)).unwrap();
        let spec = harness::ModelSpec::Er(params);
        let summaries = harness::run(&spec, trials, 0xe04 + gi as u64, 4).unwrap();
        let n23 = (n as f64).powf(2.0 / 3.0);
        for k in 1..=n {
            // lower tail at threshold k: P(cmax < k)
            let a = n23 / k as f64;
            let curve = harness::lower_tail(&summaries, n, &[a]).unwrap();
            let exact: f64 = law[..k - 1].iter().sum();
            let (lo, hi) = wilson_interval(curve.rows[0].hits, trials, 4.0);
            assert!(
                lo <= exact && exact <= hi,
                "lower n={n} p={p} k={k}: exact {exact} not in [{lo},{hi}]"
            );
            // upper tail at threshold k: P(cmax > k)
            let a = k as f64 / n23;
            let curve = harness::upper_tail(&summaries, n, &[a]).unwrap();
            let exact: f64 = law[k..].iter().sum();
            let (lo, hi) = wilson_interval(curve.rows[0].hits, trials, 4.0);
            assert!(
                lo <= exact && exact <= hi,
                "upper n={n} p={p} k={k}: exact {exact} not in [{lo},{hi}]"
            );
        }
    }
}

#[test]
fn regular_replay_matches_union_find() {
    let mut stream = derive_stream(0xf01, 0);
    for rep in 0..500 {
        let d = [3, 4, 5][stream.index(3)];
        let mut n = 2 + stream.index(63);
        if !(n * d).is_multiple_of(2) {
            n += 1;
        }
        let pairing = regular::pair_full(n, d, &mut stream).unwrap();
        let p = [0.0, 0.2, 0.5, 1.0][stream.index(4)];
        let marks = regular::draw_retention(&pairing, p, &mut stream);
        let truth = oracle::union_find_components(&MaterializedInstance::Percolated {
            pairing: pairing.clone(),
            retention: marks.clone(),
        })
        .unwrap();
        let ordering = if rep % 2 == 0 {
            (0..n as u32).collect::<Vec<_>>()
        } else {
            shuffled_ordering(n, &mut stream)
        };
        let replay = regular::explore_on_instance(&pairing, &marks, &ordering).unwrap();
        assert_eq!(replay.sorted_sizes(), truth, "rep {rep} n {n} d {d} p {p}");
    }
}

#[test]
fn regular_simplicity_frequency() {
    // P(simple) -> e^{(1-d^2)/4}; finite-n bias allowance on top of 4 SE
    let trials = 40_000u64;
    for d in [3usize, 4] {
        let reference = ((1.0 - (d * d) as f64) / 4.0).exp();
        let (hits, _) = regular::simple_frequency(300, d, trials, 0xf02 + d as u64).unwrap();
        let freq = hits as f64 / trials as f64;
        let se = (reference * (1.0 - reference) / trials as f64).sqrt();
        assert!(
            (freq - reference).abs() < 4.0 * se + 0.008,
            "d={d}: freq {freq} vs {reference}"
        );
    }
}

#[test]
fn regular_excursion_bound_battery() {
    for d in [3usize, 4, 5] {
        let params = regular::RegParams::new(1000, d, 0.0, None).unwrap();
        for i in 0..500 {
            let mut s = derive_stream(0xf03 + d as u64, i);
            let profile = regular::explore(&params, &mut s);
            assert!(regular::excursion_bound_holds(&profile, d), "d={d} trial {i}");
            assert_eq!(profile.sizes.iter().sum::<u64>(), 1000);
        }
    }
}

#[test]
fn regular_conditioning_consistency() {
    // replay on simple pairings vs direct union-find on independently drawn
    // simple pairings: same law of cmax
    let n = 16;
    let d = 3;
    let p = 0.5;
    let per_side = 30_000;
    let ordering: Vec<u32> = (0..n as u32).collect();

    let mut replay_counts = vec![0u64; n + 1];
    let mut stream = derive_stream(0xf04, 0);
    let mut got = 0;
    while got < per_side {
        let pairing = regular::pair_full(n, d, &mut stream).unwrap();
        if !regular::is_simple(&pairing) {
            continue;
        }
        let marks = regular::draw_retention(&pairing, p, &mut stream);
        let profile = regular::explore_on_instance(&pairing, &marks, &ordering).unwrap();
        replay_counts[profile.cmax() as usize] += 1;
        got += 1;
    }

    let mut direct_counts = vec![0u64; n + 1];
    let mut stream = derive_stream(0xf05, 0);
    let mut got = 0;
    while got < per_side {
        let pairing = regular::pair_full(n, d, &mut stream).unwrap();
        if !regular::is_simple(&pairing) {
            continue;
        }
        let marks = regular::draw_retention(&pairing, p, &mut stream);
        let sizes = oracle::union_find_components(&MaterializedInstance::Percolated {
            pairing,
            retention: marks,
        })
        .unwrap();
        direct_counts[sizes[0] as usize] += 1;
        got += 1;
    }

    let (stat, df, pval) = two_sample_chi_square(&replay_counts, &direct_counts, 5.0);
    assert!(pval > 0.01, "chi-square stat {stat} df {df} p {pval}");
}

#[test]
fn intersection_explore_law_matches_bipartite_oracle() {
    let n = 30;
    let trials = 100_000u64;
    let params = intersection::IntersectionParams::new(n, 1.0, 1.0).unwrap();
    let mut walk_counts = vec![0u64; n + 1];
    for i in 0..trials {
        let mut s = derive_stream(0xa01, i);
        walk_counts[intersection::explore(&params, &mut s).profile.cmax() as usize] += 1;
    }
    let mut graph_counts = vec![0u64; n + 1];
    for i in 0..trials {
        let mut s = derive_stream(0xa02, i);
        let inst = intersection::materialize(&params, &mut s).unwrap();
        let sizes =
            oracle::union_find_components(&MaterializedInstance::Bipartite(inst)).unwrap();
        graph_counts[sizes[0] as usize] += 1;
    }
    let (stat, df, p) = two_sample_chi_square(&walk_counts, &graph_counts, 5.0);
    assert!(p > 0.01, "chi-square stat {stat} df {df} p {p}");
}

#[test]
fn intersection_first_step_mean_bounded_by_nkp2() {
    let samples = 100_000u64;
    for (gi, &(beta, gamma)) in
        [(1.0f64, 1.0f64), (4.0, 1.0), (1.0, 0.5), (2.0, 0.7)].iter().enumerate()
    {
        for (ni, &n) in [1000usize, 10_000].iter().enumerate() {
            let params = intersection::IntersectionParams::new(n, beta, gamma).unwrap();
            let mut s = derive_stream(0xa03, (gi * 2 + ni) as u64);
            // mean and rough second moment in one pass
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let m = intersection::mean_offspring_check(&params, 1, &mut s);
                sum += m;
                sum_sq += m * m;
            }
            let mean = sum / samples as f64;
            let var = (sum_sq - samples as f64 * mean * mean) / (samples as f64 - 1.0);
            let se = (var / samples as f64).sqrt();
            let cap = n as f64 * params.k() as f64 * params.link_prob().powi(2);
            assert!(
                mean - 4.0 * se <= cap,
                "beta={beta} gamma={gamma} n={n}: mean {mean} exceeds cap {cap}"
            );
        }
    }
}

#[test]
fn intersection_critical_mean_offspring_near_one() {
    let params = intersection::IntersectionParams::new(100_000, 1.0, 1.0).unwrap();
    assert!(params.is_critical());
    let mut s = derive_stream(0xa04, 0);
    let mean = intersection::mean_offspring_check(&params, 1_000_000, &mut s);
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");

    // supercritical calibration: mean just below the analytic cap nkp^2 = 4
    let params = intersection::IntersectionParams::new(100_000, 4.0, 1.0).unwrap();
    let mut s = derive_stream(0xa05, 0);
    let mean = intersection::mean_offspring_check(&params, 200_000, &mut s);
    let se = 0.009; // sd ~ sqrt(8), 2e5 samples
    assert!(mean > 3.5 && mean <= 4.0 + 4.0 * se, "mean {mean}");
}

#[test]
fn quantum_first_interval_law_is_cut_gamma() {
    // the interval holding a uniform point on a rate-1 punctured circle has
    // the cut-gamma law: KS on the continuous part, frequency check on the
    // full-circle atom
    let params = quantum::QuantumParams::new(1, 2.0, 1.5).unwrap();
    let theta = params.theta();
    let draws = 100_000;
    let mut continuous = Vec::new();
    let mut atoms = 0u64;
    let mut stream = derive_stream(0xd01, 0);
    for _ in 0..draws {
        let inst = quantum::materialize_quantum(&params, &mut stream).unwrap();
        let x = stream.next_f64() * theta;
        let len = inst.intervals[inst.locate(0, x)].len;
        if (len - theta).abs() < 1e-12 {
            atoms += 1;
        } else {
            continuous.push(len);
        }
    }
    let atom_prob = (1.0 + theta) * (-theta).exp();
    let freq = atoms as f64 / draws as f64;
    let se = (atom_prob * (1.0 - atom_prob) / draws as f64).sqrt();
    assert!((freq - atom_prob).abs() < 4.0 * se, "atom freq {freq} vs {atom_prob}");

    let mass = 1.0 - atom_prob;
    let cdf = move |x: f64| (1.0 - (1.0 + x) * (-x).exp()) / mass;
    let d = ks_statistic(&mut continuous, cdf);
    let p = ks_p_value(d, continuous.len());
    assert!(p > 0.01, "KS d {d} p {p}");
}

#[test]
fn quantum_full_replay_matches_union_find() {
    let mut stream = derive_stream(0xd02, 0);
    for rep in 0..200 {
        let n = 2 + stream.index(23);
        let params = quantum::QuantumParams::new(n, 2.0, 1.2).unwrap();
        let inst = quantum::materialize_quantum(&params, &mut stream).unwrap();
        let truth =
            oracle::union_find_components(&MaterializedInstance::Quantum(inst.clone())).unwrap();
        let replay = quantum::full_explore(&inst).unwrap();
        assert_eq!(replay.sorted_sizes(), truth, "rep {rep} n {n}");
    }
}

#[test]
fn quantum_reduced_no_larger_than_full_in_mean() {
    let beta = 2.0;
    let lambda = quantum::solve_critical_lambda(beta).unwrap().lambdas[0];
    let n = 64;
    let trials = 100_000u64;
    let params = quantum::QuantumParams::new(n, beta, lambda).unwrap();

    let mut sum_reduced = 0.0;
    let mut sum_sq_reduced = 0.0;
    for i in 0..trials {
        let mut s = derive_stream(0xd03, i);
        let c = quantum::reduced_explore(&params, &mut s).cmax() as f64;
        sum_reduced += c;
        sum_sq_reduced += c * c;
    }
    let mut sum_full = 0.0;
    let mut sum_sq_full = 0.0;
    for i in 0..trials {
        let mut s = derive_stream(0xd04, i);
        let inst = quantum::materialize_quantum(&params, &mut s).unwrap();
        let c = quantum::full_explore(&inst).unwrap().cmax() as f64;
        sum_full += c;
        sum_sq_full += c * c;
    }
    let t = trials as f64;
    let mean_reduced = sum_reduced / t;
    let mean_full = sum_full / t;
    let var_reduced = (sum_sq_reduced - t * mean_reduced * mean_reduced) / (t - 1.0);
    let var_full = (sum_sq_full - t * mean_full * mean_full) / (t - 1.0);
    let se = ((var_reduced + var_full) / t).sqrt();
    assert!(
        mean_reduced <= mean_full + 4.0 * se,
        "reduced {mean_reduced} vs full {mean_full} (se {se})"
    );
}

#[test]
fn quantum_critical_median_cmax_has_n_two_thirds_order() {
    let beta = 2.0;
    let lambda = quantum::solve_critical_lambda(beta).unwrap().lambdas[0];
    let n = 100_000usize;
    let spec = harness::ModelSpec::Quantum(quantum::QuantumParams::new(n, beta, lambda).unwrap());
    let summaries = harness::run(&spec, 4000, 0xd06, 2).unwrap();
    let mut cmaxes: Vec<u64> = summaries.iter().map(|s| s.cmax).collect();
    cmaxes.sort_unstable();
    let median = cmaxes[cmaxes.len() / 2] as f64;
    let n23 = (n as f64).powf(2.0 / 3.0);
    assert!(
        (0.1 * n23..=10.0 * n23).contains(&median),
        "median {median} outside [{}, {}]",
        0.1 * n23,
        10.0 * n23
    );
}

#[test]
fn quantum_critical_point_monte_carlo_cross_check() {
    // at a solved root, E[n (1 - e^{-J/(lambda n)})] = F(theta)/lambda + O(1/n) = 1
    let cp = quantum::solve_critical_lambda(2.0).unwrap();
    let lambda = cp.lambdas[0];
    let theta = 2.0 * lambda;
    let n = 1_000_000f64;
    let cut = critwalk::rng::CutGammaParams::new(theta).unwrap();
    let mut stream = derive_stream(0xd05, 0);
    let draws = 1_000_000;
    let mut sum = 0.0;
    for _ in 0..draws {
        let j = critwalk::rng::sample_cut_gamma(&cut, &mut stream);
        sum += n * (-(-j / (lambda * n)).exp_m1());
    }
    let mean = sum / draws as f64;
    assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
}

#[test]
fn walk_ballot_sum_matches_survival() {
    // tautological identity on the strictly-positive walk from zero: the
    // endpoint-summed ballot probabilities reproduce the survival probability
    let n = 8u64;
    let trials = 200_000u64;
    let mut sum_phat = 0.0;
    let mut var_sum = 0.0;
    for (i, j) in [2i64, 4, 6, 8].iter().enumerate() {
        let mut s = derive_stream(0xb01, i as u64);
        let est = walk::ballot_estimate(&IncrementLaw::Rademacher, n, *j, trials, &mut s).unwrap();
        assert!(!est.unreachable);
        sum_phat += est.phat;
        var_sum += est.phat * (1.0 - est.phat) / trials as f64;
    }
    let mut s = derive_stream(0xb02, 0);
    let hist = walk::ballot_endpoint_histogram(&IncrementLaw::Rademacher, n, trials, &mut s)
        .unwrap();
    let survival = hist.values().sum::<u64>() as f64 / trials as f64;
    var_sum += survival * (1.0 - survival) / trials as f64;
    let tol = 4.0 * var_sum.sqrt();
    assert!((sum_phat - survival).abs() < tol, "{sum_phat} vs {survival} tol {tol}");
}

/// Exact P(S_t > 0 for t in [n], S_n = j) for the Poisson(1)-1 walk by
/// dynamic programming over the strictly positive states.
fn ballot_exact_poisson(n: usize, j_max: usize) -> Vec<f64> {
    let cap = j_max + 60; // survivor mass beyond the cap is negligible
    let e_inv = (-1.0f64).exp();
    // step pmf: P(X = k) = e^{-1} / (k+1)! for k >= -1
    let step: Vec<f64> = (0..cap + 2)
        .scan(e_inv, |fact, k| {
            let p = *fact;
            *fact /= (k + 1) as f64;
            Some(p)
        })
        .collect();
    let mut f = vec![0.0f64; cap + 1];
    f[1..=cap].copy_from_slice(&step[2..=cap + 1]);
    for _ in 1..n {
        let mut next = vec![0.0f64; cap + 1];
        for (s, &mass) in f.iter().enumerate().skip(1) {
            if mass == 0.0 {
                continue;
            }
            for target in (s - 1).max(1)..=cap {
                next[target] += mass * step[target + 1 - s];
            }
        }
        f = next;
    }
    f[..=j_max].to_vec()
}

#[test]
fn walk_ballot_matches_exact_dp_oracle() {
    let n = 32;
    let trials = 400_000u64;
    let exact = ballot_exact_poisson(n, 8);
    for (i, j) in [1usize, 2, 3, 5, 8].iter().enumerate() {
        let mut s = derive_stream(0xb04, i as u64);
        let est = walk::ballot_estimate(
            &IncrementLaw::PoissonMinusOne,
            n as u64,
            *j as i64,
            trials,
            &mut s,
        )
        .unwrap();
        let (lo, hi) = wilson_interval(est.hits, trials, 4.0);
        assert!(
            lo <= exact[*j] && exact[*j] <= hi,
            "j={j}: exact {} outside [{lo},{hi}] (phat {})",
            exact[*j],
            est.phat
        );
    }
    // Rademacher n=4, j=2: the two surviving paths give exactly 1/8
    let mut s = derive_stream(0xb05, 0);
    let est = walk::ballot_estimate(&IncrementLaw::Rademacher, 4, 2, trials, &mut s).unwrap();
    assert!(est.ci_lo < 0.125 && 0.125 < est.ci_hi, "{est:?}");
}

#[test]
fn harness_wilson_coverage() {
    let p = 0.3;
    let reps = 1000;
    let trials = 10_000u64;
    let mut covered = 0;
    for i in 0..reps {
        let mut s = derive_stream(0xb03, i);
        let hits = (0..trials).filter(|_| s.bernoulli(p)).count() as u64;
        let (lo, hi) = wilson_interval(hits, trials, 1.96);
        if lo <= p && p <= hi {
            covered += 1;
        }
    }
    assert!(covered >= 930, "coverage {covered}/1000");
}
