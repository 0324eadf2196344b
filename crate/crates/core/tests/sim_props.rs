use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softkey::sim::{
    bin_encode, decode_in_bin, estimate_security, run_protocol, sample_round, toeplitz_hash,
    Decoder, ProtocolConfig, ProtocolSetup, SecurityConfig, SideInfo, SwCode, ToeplitzHash,
};
use softkey::{
    build_cell_table, snr_nnr_to_params, validate_thresholds, CellTable, Observer, Party,
};
use softkey_testkit as kit;

fn paper_table(snr: f64, nnr: f64) -> CellTable {
    let p = snr_nnr_to_params(snr, nnr).unwrap();
    build_cell_table(&p, &validate_thresholds(&[1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap()).unwrap()
}

#[test]
fn channel_statistics() {
    let p = snr_nnr_to_params(2.0, 3.0).unwrap();
    let n = 1_000_000;
    let r = sample_round(n, &p, 5).unwrap();
    let mean_u = r.u.iter().map(|&u| f64::from(u)).sum::<f64>() / n as f64;
    assert!(mean_u.abs() <= 4.0 / (n as f64).sqrt());
    for (obs, v) in [(&r.x, p.v_a), (&r.y, p.v_b), (&r.z, p.v_e)] {
        let s2 = obs
            .iter()
            .zip(&r.u)
            .map(|(o, &u)| (o - f64::from(u)).powi(2))
            .sum::<f64>()
            / n as f64;
        // variance of the sample second moment of N(0, v) is 2v²/n
        assert!((s2 - v).abs() <= 4.0 * v * (2.0 / n as f64).sqrt());
    }
}

#[test]
fn bin_index_uniform_over_seeds() {
    let bins = 64u64;
    let bits = [1u8, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0];
    let mut counts = vec![0u64; bins as usize];
    for seed in 0..100_000u64 {
        let code = SwCode::new(bins, seed, 0.0).unwrap();
        counts[(bin_encode(&bits, &code).unwrap() - 1) as usize] += 1;
    }
    // z = 3.0902 is the upper 10⁻³ normal quantile
    let stat = kit::chi_square_uniform(&counts);
    assert!(stat < kit::chi_square_critical(63, 3.0902), "χ² = {stat}");
}

#[test]
fn ml_decoder_is_the_in_bin_argmax() {
    let table = paper_table(3.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..40 {
        let len = rng.random_range(1..=10);
        let obs: Vec<f64> = (0..len).map(|_| rng.random_range(-2.5..2.5)).collect();
        let pairs: Vec<(usize, usize)> = obs
            .iter()
            .map(|&o| (rng.random_range(0..4), softkey::reliability_level(o, table.thresholds())))
            .collect();
        let side = SideInfo { target: Party::Alice, obs: &obs, pairs: &pairs };
        let code = SwCode::new(rng.random_range(1..40), trial, 0.0).unwrap();
        let truth: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let bin = bin_encode(&truth, &code).unwrap();

        let post: Vec<f64> = obs
            .iter()
            .zip(&pairs)
            .map(|(&o, &pr)| table.posterior_bit(Party::Alice, Observer::Partner, o, pr).unwrap())
            .collect();
        let mut best: Option<(f64, Vec<u8>)> = None;
        for w in 0u32..(1 << len) {
            let cand: Vec<u8> = (0..len).map(|i| (w >> i & 1) as u8).collect();
            if bin_encode(&cand, &code).unwrap() != bin {
                continue;
            }
            let lp: f64 = cand
                .iter()
                .zip(&post)
                .map(|(&b, &p)| if b == 1 { p.ln() } else { (1.0 - p).ln() })
                .sum();
            let better = match &best {
                None => true,
                Some((l, s)) => lp > *l + 1e-12 || ((lp - l).abs() <= 1e-12 && cand < *s),
            };
            if better {
                best = Some((lp, cand));
            }
        }
        let got = decode_in_bin(bin, &side, &code, &table, Decoder::Ml).unwrap();
        assert_eq!(got, best.map(|b| b.1), "trial {trial}");
    }
}

#[test]
fn decoder_edge_cases() {
    let table = paper_table(5.0, 10.0);
    let obs = [0.9, -0.2, 0.4, 1.3];
    let pairs = [(3, 3), (0, 0), (1, 1), (3, 3)];
    let side = SideInfo { target: Party::Alice, obs: &obs, pairs: &pairs };
    let truth = [1u8, 1, 0, 1];
    let full = SwCode::with_bits(4, 3, 0.0).unwrap();
    let bin = bin_encode(&truth, &full).unwrap();
    assert_eq!(decode_in_bin(bin, &side, &full, &table, Decoder::Ml).unwrap(), Some(truth.to_vec()));
    // no sequence is this typical
    let strict = Decoder::Typicality { threshold: 0.0 };
    assert_eq!(decode_in_bin(bin, &side, &full, &table, strict).unwrap(), None);
    let coarse = SwCode::new(3, 3, 0.0).unwrap();
    let bin = bin_encode(&truth, &coarse).unwrap();
    assert_eq!(decode_in_bin(bin, &side, &coarse, &table, strict).unwrap(), None);

    let long = vec![0.5; 25];
    let lp = vec![(1, 1); 25];
    let side = SideInfo { target: Party::Bob, obs: &long, pairs: &lp };
    assert!(matches!(
        decode_in_bin(1, &side, &coarse, &table, Decoder::Ml),
        Err(softkey::Error::Capacity(_))
    ));
}

#[test]
fn toeplitz_is_two_universal() {
    for in_len in 1..=6usize {
        for out_len in 1..=3usize {
            let seed_len = in_len + out_len - 1;
            let seeds: Vec<Vec<u8>> = (0..1u32 << seed_len)
                .map(|s| (0..seed_len).map(|i| (s >> i & 1) as u8).collect())
                .collect();
            let inputs: Vec<Vec<u8>> = (0..1u32 << in_len)
                .map(|r| (0..in_len).map(|i| (r >> i & 1) as u8).collect())
                .collect();
            let hashes: Vec<Vec<Vec<u8>>> = seeds
                .iter()
                .map(|s| inputs.iter().map(|r| toeplitz_hash(r, s, out_len).unwrap()).collect())
                .collect();
            for a in 0..inputs.len() {
                for b in a + 1..inputs.len() {
                    let coll = hashes.iter().filter(|h| h[a] == h[b]).count();
                    // P[f(r) = f(r')] ≤ 1/|S|
                    assert!(coll << out_len <= seeds.len(), "{in_len}->{out_len}");
                }
            }
        }
    }
}

#[test]
fn toeplitz_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = ToeplitzHash::random(12, 5, &mut rng);
    for _ in 0..50 {
        let a: u64 = rng.random_range(0..1 << 12);
        let b: u64 = rng.random_range(0..1 << 12);
        assert_eq!(h.hash_packed(a ^ b), h.hash_packed(a) ^ h.hash_packed(b));
    }
    assert_eq!(h.hash_packed(0), 0);
}

#[test]
fn protocol_reconciliation_and_key_size() {
    let p = snr_nnr_to_params(5.0, 10.0).unwrap();
    let t = validate_thresholds(&[1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
    let setup = ProtocolSetup::new(&p, &t).unwrap();
    let full = ProtocolConfig { full_disclosure: true, key_len: Some(6), ..Default::default() };
    let sized = ProtocolConfig { gamma: 0.3, ..Default::default() };
    for seed in 0..300 {
        let tr = run_protocol(24, &setup, &full, seed).unwrap();
        assert!(tr.reconciled());
        assert_eq!(tr.outcome.agrees(), Some(true));
        assert_eq!(tr.code_a.bin_count, 1 << tr.x_kept.len());
        let tr = run_protocol(24, &setup, &sized, seed).unwrap();
        let bits_a = tr.code_a.bin_count.trailing_zeros();
        let bits_b = tr.code_b.bin_count.trailing_zeros();
        let rule = setup.key_length_rule(24, bits_a, bits_b, sized.delta);
        let expect = (24.0 * (setup.report.h_kept_given_eve - 2.0 * sized.delta)
            - f64::from(bits_a + bits_b))
            .floor() as i64;
        assert_eq!(rule, expect);
        assert_eq!(tr.key_len as i64, rule.clamp(0, (tr.x_kept.len() + tr.y_kept.len()) as i64));
        let json = serde_json::to_string(&tr).unwrap();
        assert!(json.contains("\"m_a\""));
    }
}

#[test]
fn eve_blind_regime_agrees_often() {
    let p = snr_nnr_to_params(5.0, 1e6).unwrap();
    let t = validate_thresholds(&[1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
    let setup = ProtocolSetup::new(&p, &t).unwrap();
    let cfg = ProtocolConfig { gamma: 0.3, delta: 0.01, ..Default::default() };
    let (mut keys, mut bad) = (0, 0);
    for seed in 0..2000 {
        let tr = run_protocol(16, &setup, &cfg, seed).unwrap();
        if let Some(ok) = tr.outcome.agrees() {
            keys += 1;
            bad += usize::from(!ok);
        }
    }
    assert!(keys > 1000);
    assert!((bad as f64) < 0.05 * keys as f64, "{bad}/{keys}");
}

#[test]
fn security_trivial_cases() {
    let p = snr_nnr_to_params(0.0, 1.0).unwrap();
    let t = validate_thresholds(&[1.0]).unwrap();
    let setup = ProtocolSetup::new(&p, &t).unwrap();
    let base = SecurityConfig { n: 2, z_samples: 50, f_samples: 10, seed: 4, ..Default::default() };

    let none = estimate_security(&setup, &SecurityConfig { out_len: 0, ..base }).unwrap();
    assert_eq!(none.delta_mean, 0.0);

    let zero = estimate_security(&setup, &SecurityConfig { alpha: Some(0.0), ..base }).unwrap();
    // α = 0: the atypical-set term vanishes, leaving the average of √(|S|·|M|)
    assert!(zero.bound_rhs >= 2f64.sqrt() - 1e-12);
    assert!(zero.bound_rhs <= (2f64 * 2f64.powf(2.0 * base.n as f64)).sqrt());

    let est = estimate_security(&setup, &base).unwrap();
    assert!((0.0..=2.0).contains(&est.delta_mean));
    assert!(est.bound_rhs >= 0.0);
    assert!(est.distance_bound_holds() && est.entropy_floor_holds());

    let five = SecurityConfig { n: 5, ..base };
    assert!(matches!(estimate_security(&setup, &five), Err(softkey::Error::Capacity(_))));
}

#[test]
fn reconciliation_margin_and_disclosure() {
    use softkey::sim::{reconciliation_error_rate, ReconcileConfig};
    let p = snr_nnr_to_params(5.0, 10.0).unwrap();
    let t = validate_thresholds(&[1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
    let setup = ProtocolSetup::new(&p, &t).unwrap();
    let cfg = |gamma, full| ReconcileConfig {
        kept_len: 16,
        gamma,
        decoder: Decoder::Ml,
        full_disclosure: full,
        trials: 10_000,
        seed: 8,
    };
    let wide = reconciliation_error_rate(&setup, &cfg(0.3, false)).unwrap();
    let narrow = reconciliation_error_rate(&setup, &cfg(0.05, false)).unwrap();
    assert!(wide.message_bits > narrow.message_bits);
    assert!(wide.error_rate() < narrow.error_rate(), "{wide:?} {narrow:?}");
    let full = reconciliation_error_rate(&setup, &cfg(0.0, true)).unwrap();
    assert_eq!(full.errors, 0);
}
