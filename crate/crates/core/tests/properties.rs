use proptest::prelude::*;

use unilrt::data::{sample_gaussian, split_means, RngStream, SampleSet, SplitScratch};
use unilrt::doughnut::{project_to_annulus, AnnulusNull};
use unilrt::logspace::{log_mean_exp, log_sum_exp, sq_dist, sq_norm};
use unilrt::regions::{
    crossfit_log_statistic, optimal_split_proportion, split_log_statistic, split_region, subsampling_log_statistic,
};
use unilrt::specfun::{chi2_sf, chi2_upper_quantile};

fn vec_d(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_lands_in_annulus_and_is_idempotent(y in vec_d(3), r_in in 0.1f64..1.0, width in 0.0f64..2.0) {
        prop_assume!(sq_norm(&y) > 1e-12);
        let null = AnnulusNull::new(r_in, r_in + width).unwrap();
        let p = project_to_annulus(&y, &null);
        let norm = sq_norm(&p).sqrt();
        prop_assert!(norm >= null.r_in * (1.0 - 1e-12) && norm <= null.r_out * (1.0 + 1e-12));
        let again = project_to_annulus(&p, &null);
        prop_assert!(sq_dist(&p, &again) < 1e-24);
    }

    #[test]
    fn projection_is_nearest_annulus_point(y in vec_d(2), angle in 0.0f64..std::f64::consts::TAU, s in 0.0f64..1.0) {
        prop_assume!(sq_norm(&y) > 1e-12);
        let null = AnnulusNull::default();
        let p = project_to_annulus(&y, &null);
        let r = null.r_in + s * (null.r_out - null.r_in);
        let q = [r * angle.cos(), r * angle.sin()];
        prop_assert!(sq_dist(&y, &p) <= sq_dist(&y, &q) + 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum(v in prop::collection::vec(-30.0f64..30.0, 1..40), shift in -500.0f64..500.0) {
        let direct = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((log_sum_exp(&v) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        prop_assert!((log_sum_exp(&shifted) - (direct + shift)).abs() < 1e-9 * (direct + shift).abs().max(1.0));
        prop_assert!((log_mean_exp(&v) - (direct - (v.len() as f64).ln())).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn optimal_split_lies_strictly_between_half_and_one(log_inv_alpha in 0.01f64..40.0, d in 1usize..2000) {
        let p = optimal_split_proportion((-log_inv_alpha).exp(), d).unwrap();
        prop_assert!(p > 0.5 && p < 1.0);
    }

    #[test]
    fn quantile_round_trips(log_inv_alpha in 0.05f64..40.0, d in 1u32..500) {
        let alpha = (-log_inv_alpha).exp();
        let c = chi2_upper_quantile(alpha, d).unwrap();
        prop_assert!((chi2_sf(c, d).unwrap() / alpha - 1.0).abs() < 1e-8);
    }

    #[test]
    fn split_set_is_sublevel_set_of_split_statistic(seed in any::<u64>(), theta in vec_d(3), alpha in 0.01f64..0.5) {
        let sample = sample_gaussian(40, 3, &[0.0; 3], &mut RngStream::new(seed, 0)).unwrap();
        let pair = split_means(&sample, 0.5, &mut RngStream::new(seed, 1), &mut SplitScratch::default()).unwrap();
        let region = split_region(&pair, 40, alpha).unwrap();
        let stat = split_log_statistic(&theta, &pair, 40).unwrap();
        let margin = (sq_dist(&region.center, &theta) - region.sq_radius).abs();
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(region.contains(&theta), !stat.rejects(alpha));
    }

    #[test]
    fn crossfit_lies_between_its_two_directions(seed in any::<u64>(), theta in vec_d(2)) {
        let sample = sample_gaussian(30, 2, &[0.0; 2], &mut RngStream::new(seed, 0)).unwrap();
        let pair = split_means(&sample, 0.5, &mut RngStream::new(seed, 1), &mut SplitScratch::default()).unwrap();
        let forward = split_log_statistic(&theta, &pair, 30).unwrap().log_value;
        let cf = crossfit_log_statistic(&theta, &pair, 30).unwrap().log_value;
        let mut swapped = pair.clone();
        std::mem::swap(&mut swapped.mean0, &mut swapped.mean1);
        std::mem::swap(&mut swapped.n0, &mut swapped.n1);
        let backward = split_log_statistic(&theta, &swapped, 30).unwrap().log_value;
        prop_assert!(cf <= forward.max(backward) + 1e-12 && cf >= forward.min(backward) - 1e-12);
    }

    #[test]
    fn one_split_subsampling_equals_split(seed in any::<u64>(), theta in vec_d(2)) {
        let sample = sample_gaussian(20, 2, &[0.0; 2], &mut RngStream::new(seed, 0)).unwrap();
        let pair = split_means(&sample, 0.5, &mut RngStream::new(seed, 1), &mut SplitScratch::default()).unwrap();
        let split = split_log_statistic(&theta, &pair, 20).unwrap().log_value;
        let sub = subsampling_log_statistic(&theta, std::slice::from_ref(&pair), 20).unwrap().log_value;
        prop_assert_eq!(split, sub);
    }

    #[test]
    fn substreams_do_not_advance_parent(seed in any::<u64>(), key in any::<u64>()) {
        let mut a = RngStream::new(seed, 3);
        let mut b = a.clone();
        let _ = b.substream(key).next_u64();
        prop_assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn flat_rows_round_trip(rows in prop::collection::vec(vec_d(4), 2..20)) {
        let s = SampleSet::from_rows(&rows).unwrap();
        prop_assert_eq!(s.n(), rows.len());
        for (i, r) in rows.iter().enumerate() {
            prop_assert_eq!(s.row(i), &r[..]);
        }
    }
}
