use hcec::codec::{decode, encode, partition, unpartition, EvalPoints};
use hcec::field::{batch_inverse, DEFAULT_PRIME};
use hcec::matrix::max_abs_diff;
use hcec::verify::{random_field_matrix, random_real_matrix};
use hcec::{EncodedBlock, Field, Matrix, MdsCode, PrimeField, Real};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn subset<E: Copy>(blocks: &[EncodedBlock<E>], indices: &[usize]) -> Vec<EncodedBlock<E>> {
    indices.iter().map(|&i| blocks[i].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prime_roundtrip_any_subset(
        k in 1usize..8,
        extra in 0usize..8,
        rows in 1usize..12,
        cols in 1usize..5,
        seed in any::<u64>(),
    ) {
        let n = k + extra;
        let field = PrimeField::new(DEFAULT_PRIME).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_field_matrix(&field, rows, cols, &mut rng);
        let p = partition(&field, &a, k).unwrap();
        let code = MdsCode::prime(field, k, n).unwrap();
        let blocks = encode(&p, &code).unwrap();
        let chosen = sample(&mut rng, n, k).into_vec();
        let dec = decode(&code, &subset(&blocks, &chosen)).unwrap();
        prop_assert_eq!(&dec.blocks, &p.parts);
        prop_assert_eq!(unpartition(&dec.blocks, p.pad_rows).unwrap(), a);
    }

    #[test]
    fn encoding_is_linear(k in 1usize..6, n_extra in 0usize..4, seed in any::<u64>()) {
        let field = PrimeField::new(DEFAULT_PRIME).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_field_matrix(&field, 2 * k, 3, &mut rng);
        let y = random_field_matrix(&field, 2 * k, 3, &mut rng);
        let c = rng.random_range(0..DEFAULT_PRIME);
        let z = Matrix::from_fn(2 * k, 3, |r, col| field.add(x[(r, col)], field.mul(c, y[(r, col)])));
        let code = MdsCode::prime(field, k, k + n_extra).unwrap();
        for idx in 1..=code.n() {
            let ex = code.encode_at(&partition(&field, &x, k).unwrap().parts, idx).unwrap();
            let ey = code.encode_at(&partition(&field, &y, k).unwrap().parts, idx).unwrap();
            let ez = code.encode_at(&partition(&field, &z, k).unwrap().parts, idx).unwrap();
            let combined = Matrix::from_fn(2, 3, |r, col| field.add(ex[(r, col)], field.mul(c, ey[(r, col)])));
            prop_assert_eq!(ez, combined);
        }
    }

    #[test]
    fn real_roundtrip_small_k(k in 1usize..6, extra in 0usize..6, seed in any::<u64>()) {
        let n = k + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_real_matrix(3 * k + 1, 4, &mut rng);
        let p = partition(&Real, &a, k).unwrap();
        let code = MdsCode::real(k, n, EvalPoints::Integers).unwrap();
        let blocks = encode(&p, &code).unwrap();
        let chosen = sample(&mut rng, n, k).into_vec();
        let dec = decode(&code, &subset(&blocks, &chosen)).unwrap();
        let got = unpartition(&dec.blocks, p.pad_rows).unwrap();
        let (err, scale) = max_abs_diff(&Real, &got, &a);
        prop_assert!(err <= 1e-9 * scale.max(1.0), "err {err}");
    }

    #[test]
    fn prime_field_inverse_and_distributivity(a in 1u64..DEFAULT_PRIME, b in 0u64..DEFAULT_PRIME, c in 0u64..DEFAULT_PRIME) {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(b, c), c), b);
    }
}

#[test]
fn batch_inverse_matches_single() {
    let f = PrimeField::new(DEFAULT_PRIME).unwrap();
    let xs: Vec<u64> = (1..200).map(|x| x * 7919 % DEFAULT_PRIME).collect();
    let inv = batch_inverse(&f, &xs).unwrap();
    for (x, y) in xs.iter().zip(&inv) {
        assert_eq!(f.inv(*x).unwrap(), *y);
    }
    assert!(batch_inverse(&f, &[3, 0, 5]).is_none());
}

#[test]
fn two_of_eight_every_pair() {
    // A split in two halves, eight evaluations at 1..8, any two suffice
    let a = Matrix::from_fn(4, 3, |r, c| (r * 3 + c) as f64 - 5.0);
    let p = partition(&Real, &a, 2).unwrap();
    let code = MdsCode::real(2, 8, EvalPoints::Integers).unwrap();
    let blocks = encode(&p, &code).unwrap();
    for i in 0..8 {
        for j in i + 1..8 {
            let dec = decode(&code, &subset(&blocks, &[j, i])).unwrap();
            assert_eq!(unpartition(&dec.blocks, 0).unwrap(), a);
        }
    }
}

#[test]
fn decode_rejects_bad_input() {
    let field = PrimeField::new(101).unwrap();
    let a = Matrix::from_fn(4, 2, |r, c| (r + c) as u64);
    let p = partition(&field, &a, 2).unwrap();
    let code = MdsCode::prime(field, 2, 5).unwrap();
    let blocks = encode(&p, &code).unwrap();
    assert!(decode(&code, &subset(&blocks, &[0])).is_err());
    assert!(decode(&code, &subset(&blocks, &[1, 1])).is_err());
    assert!(decode(&code, &subset(&blocks, &[0, 1, 2])).is_err());
    assert!(MdsCode::prime(field, 2, 101).is_err());
    assert!(PrimeField::new(100).is_err());
}

#[test]
fn integer_points_degrade_at_k10_chebyshev_do_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = random_real_matrix(40, 3, &mut rng);
    let p = partition(&Real, &a, 10).unwrap();
    let worst = |points: EvalPoints| {
        let code = MdsCode::real(10, 40, points).unwrap();
        let blocks = encode(&p, &code).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(9);
        (0..20)
            .map(|_| {
                let chosen = sample(&mut r, 40, 10).into_vec();
                let dec = decode(&code, &subset(&blocks, &chosen)).unwrap();
                let (err, scale) = max_abs_diff(&Real, &unpartition(&dec.blocks, 0).unwrap(), &a);
                err / scale
            })
            .fold(0.0, f64::max)
    };
    assert!(worst(EvalPoints::Integers) > 1e-6);
    assert!(worst(EvalPoints::Chebyshev) < 1e-6);
}
