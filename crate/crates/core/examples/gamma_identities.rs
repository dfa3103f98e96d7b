//! Compression of symmetric matrix evaluations by isometries: exact when
//! the range of `V` reduces `Y`, generically not otherwise.

use parconv::gamma::{
    check_compression, is_y2_pair, random_isometry, random_paff, random_symmetric, reducing_pair, run_trials,
    MatrixTuple,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> parconv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = random_paff(&mut rng, 2);
    for k in [2, 4, 6] {
        let (y, v) = reducing_pair(&mut rng, k, k / 2);
        let t = MatrixTuple::new(vec![random_symmetric(&mut rng, k), random_symmetric(&mut rng, k)], y)?;
        let g = random_isometry(&mut rng, k, k / 2);
        println!(
            "k = {k}: reducing pair {} residual {:.2e}; generic pair {} residual {:.2e}",
            is_y2_pair(&t, &v)?,
            check_compression(&p, &t, &v)?,
            is_y2_pair(&t, &g)?,
            check_compression(&p, &t, &g)?
        );
    }
    let report = run_trials(&mut rng, 100);
    println!("{report:#?}");
    Ok(())
}
