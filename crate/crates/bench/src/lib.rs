//! Fixed inputs shared by the criterion benches.

use hcec::codec::{encode, partition, EvalPoints, MatrixDims};
use hcec::field::DEFAULT_PRIME;
use hcec::simkernel::{sample_profiles, TrialContext};
use hcec::verify::{random_field_matrix, random_real_matrix};
use hcec::{EncodedBlock, MdsCode, PrimeField, Scheme, SchemeParams, WorkerProfile};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A real `(k, n)` Chebyshev code, all `n` encoded blocks of a random
/// `rows x cols` matrix, and one random `k`-subset to decode from.
pub fn real_case(k: usize, n: usize, rows: usize, cols: usize) -> (MdsCode<hcec::Real>, Vec<EncodedBlock<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_real_matrix(rows, cols, &mut rng);
    let p = partition(&hcec::Real, &a, k).expect("valid partition");
    let code = MdsCode::real(k, n, EvalPoints::Chebyshev).expect("valid code");
    let blocks = encode(&p, &code).expect("encodes");
    let chosen = sample(&mut rng, n, k).into_vec();
    (code, chosen.into_iter().map(|i| blocks[i].clone()).collect())
}

/// Same as [`real_case`] over the default prime field.
pub fn prime_case(k: usize, n: usize, rows: usize, cols: usize) -> (MdsCode<PrimeField>, Vec<EncodedBlock<u64>>) {
    let field = PrimeField::new(DEFAULT_PRIME).expect("prime");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_field_matrix(&field, rows, cols, &mut rng);
    let p = partition(&field, &a, k).expect("valid partition");
    let code = MdsCode::prime(field, k, n).expect("valid code");
    let blocks = encode(&p, &code).expect("encodes");
    let chosen = sample(&mut rng, n, k).into_vec();
    (code, chosen.into_iter().map(|i| blocks[i].clone()).collect())
}

/// Reference parameters at `N = N_max = 40` with half the workers straggling.
pub fn reference_trial(scheme: Scheme) -> (SchemeParams, Vec<WorkerProfile>, TrialContext) {
    let params = match scheme {
        Scheme::Bicec => SchemeParams::new(scheme, 800, 80, 40, 20),
        _ => SchemeParams::new(scheme, 10, 20, 40, 20),
    }
    .expect("valid parameters");
    let profiles = sample_profiles(40, 1e9, 0.5, 3.0, 3).expect("valid profile parameters");
    let ctx = TrialContext::new(MatrixDims { u: 2400, w: 2400, v: 2400 }, 1e9);
    (params, profiles, ctx)
}
