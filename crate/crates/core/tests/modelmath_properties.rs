mod common;

use common::*;
use ecosense::domain::{crop_bytes_for, BoundingBox, Proposal};
use ecosense::modelmath::{
    attention_normalize, column_scores, cross_entropy_loss, iou, nms, refinement_loss,
    score_map, softmax, suppression_loss, temperature_at_epoch, topk_partition,
    AttentionDescriptors, EmbeddingMap, Reduction, RefinementSchedule, ScoredBox, Tensor3,
};
use ecosense::BoundingBoxF32;
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (0.0..500.0f64, 0.0..500.0f64, 0.5..300.0f64, 0.5..300.0f64)
        .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h).unwrap())
}

fn arb_logits(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0..20.0f64, len)
}

proptest! {
    #[test]
    fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
        let ab = iou(&a, &b);
        prop_assert_eq!(ab, iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - iou_ref(corners(&a), corners(&b))).abs() < 1e-12);
        prop_assert_eq!(iou(&a, &a), 1.0);
        if a != b {
            prop_assert!(ab < 1.0);
        }
    }

    #[test]
    fn iou_f32_tracks_f64(a in arb_box(), b in arb_box()) {
        let to32 = |r: &BoundingBox| BoundingBoxF32::new(
            r.x_min() as f32, r.y_min() as f32, r.x_max() as f32, r.y_max() as f32,
        ).unwrap();
        let lo = iou(&to32(&a), &to32(&b));
        prop_assert!((f64::from(lo) - iou(&a, &b)).abs() < 1e-4);
    }

    #[test]
    fn nms_matches_fixed_point_oracle(seed in any::<u64>(), thr in prop::sample::select(vec![0.3, 0.5, 0.7, 1.0])) {
        let boxes = random_scored_boxes(&mut fixture_rng(seed), 30);
        let got = nms(&boxes, thr).unwrap();
        let want: Vec<ScoredBox> = nms_ref(&boxes, thr).into_iter().map(|i| boxes[i]).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn nms_survivors_pairwise_separated(seed in any::<u64>(), thr in 0.05..1.0f64) {
        let boxes = random_scored_boxes(&mut fixture_rng(seed), 40);
        let kept = nms(&boxes, thr).unwrap();
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(iou(&a.bbox, &b.bbox) <= thr);
            }
        }
        for w in kept.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn softmax_sums_to_one_and_is_shift_invariant(v in arb_logits(1..40), c in -50.0..50.0f64) {
        let p = softmax(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn score_map_columns_are_distributions(rows in 2usize..8, cols in 1usize..12, seed in any::<u64>()) {
        let data = random_vec(&mut fixture_rng(seed), rows * cols, 30.0);
        let p = score_map(&EmbeddingMap::new(rows, cols, data).unwrap());
        for c in 0..cols {
            prop_assert!((p.column(c).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn attention_sums_to_one_and_ignores_descriptor_scale(
        c in 1usize..6, h in 1usize..6, w in 1usize..6,
        seed in any::<u64>(), k in 1e-3..1e3f64, which in 0usize..3,
    ) {
        let mut rng = fixture_rng(seed);
        let mut pos = |n| random_vec(&mut rng, n, 1.0).into_iter().map(|x| x.abs() + 1e-3).collect::<Vec<_>>();
        let d = AttentionDescriptors { channel: pos(c), height: pos(h), width: pos(w) };
        let base = attention_normalize(&d, (c, h, w)).unwrap();
        prop_assert!((base.sum() - 1.0).abs() < 1e-9);
        let mut scaled = d.clone();
        let axis = match which { 0 => &mut scaled.channel, 1 => &mut scaled.height, _ => &mut scaled.width };
        axis.iter_mut().for_each(|x| *x *= k);
        let again = attention_normalize(&scaled, (c, h, w)).unwrap();
        for (a, b) in base.data().iter().zip(again.data()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_is_nonnegative_and_zero_on_identical(y1 in arb_logits(1..16), t in 0.05..200.0f64, seed in any::<u64>()) {
        let y2 = random_vec(&mut fixture_rng(seed), y1.len(), 20.0);
        prop_assert!(refinement_loss(&y1, &y2, t).unwrap() >= 0.0);
        prop_assert!(refinement_loss(&y1, &y1, t).unwrap().abs() < 1e-12);
    }

    #[test]
    // tanh saturates to exactly +-1 in f64 beyond |y| ~ 19, so the strict
    // bounds are checked where they are representable
    fn suppression_elements_bounded_and_monotone(y in prop::collection::vec(-8.0..8.0f64, 1..20), i in any::<prop::sample::Index>(), bump in 1e-3..5.0f64) {
        for &v in &y {
            let e = suppression_loss(&[v], Reduction::Sum);
            prop_assert!(e > 0.0 && e < 4.0);
        }
        let i = i.index(y.len());
        let mut up = y.clone();
        up[i] += bump;
        prop_assert!(suppression_loss(&up, Reduction::Sum) >= suppression_loss(&y, Reduction::Sum));
    }

    #[test]
    fn topk_agrees_with_full_sort(cols in 1usize..40, seed in any::<u64>(), kf in 0.0..1.0f64) {
        let mut rng = fixture_rng(seed);
        let rows = 3;
        let data = random_vec(&mut rng, rows * cols, 5.0);
        let emb = EmbeddingMap::new(rows, cols, data).unwrap();
        // coarse scores force ties
        let scores: Vec<f64> = random_vec(&mut rng, cols, 1.0).into_iter().map(|s| (s * 4.0).round()).collect();
        let k = 1 + ((cols - 1) as f64 * kf) as usize;
        let part = topk_partition(&scores, &emb, k).unwrap();

        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        prop_assert_eq!(part.selected_indices(), order[..k].to_vec());
        let mut all = part.selected_indices();
        all.extend(part.dropped_indices());
        all.sort_unstable();
        prop_assert_eq!(all, (0..cols).collect::<Vec<_>>());
        for col in &part.selected {
            prop_assert_eq!(&col.values, &emb.column(col.index));
        }
    }

    #[test]
    fn crop_bytes_is_ceil_of_area(b in arb_box(), bpp in 0.1..4.0f64, grow in 0.0..50.0f64) {
        let bytes = crop_bytes_for(&b, bpp).unwrap();
        prop_assert_eq!(bytes, (b.area() * bpp).ceil() as u64);
        let bigger = BoundingBox::new(b.x_min(), b.y_min(), b.x_max() + grow, b.y_max()).unwrap();
        prop_assert!(crop_bytes_for(&bigger, bpp).unwrap() >= bytes);
    }

    #[test]
    fn serde_round_trips(b in arb_box(), o in 0.0..1.0f64, class in 0usize..7, seed in any::<u64>()) {
        let json = serde_json::to_string(&b).unwrap();
        prop_assert_eq!(serde_json::from_str::<BoundingBox>(&json).unwrap(), b);
        let p = Proposal::new(b, o, class, 3.0).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Proposal>(&json).unwrap(), p);
        let t = Tensor3::new((2, 2, 3), random_vec(&mut fixture_rng(seed), 12, 1e3)).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        prop_assert_eq!(serde_json::from_str::<Tensor3>(&json).unwrap(), t);
    }
}

#[test]
fn malformed_serialized_values_are_rejected() {
    assert!(serde_json::from_str::<BoundingBox>(
        r#"{"x_min":5,"y_min":0,"x_max":1,"y_max":1}"#
    )
    .is_err());
    assert!(serde_json::from_str::<Tensor3>(r#"{"dims":[1,1,2],"data":[1.0]}"#).is_err());
}

#[test]
fn nms_equivalence_over_seeded_sets() {
    for seed in 0..1000u64 {
        let boxes = random_scored_boxes(&mut fixture_rng(seed), 50);
        for thr in [0.3, 0.5, 0.7] {
            let got = nms(&boxes, thr).unwrap();
            let want: Vec<ScoredBox> = nms_ref(&boxes, thr).into_iter().map(|i| boxes[i]).collect();
            assert_eq!(got, want, "seed {seed} thr {thr}");
        }
    }
}

#[test]
fn losses_match_reference_on_seeded_fixtures() {
    for seed in 0..100u64 {
        let mut rng = fixture_rng(seed);
        let n = 2 + (seed as usize % 9);
        let logits = random_vec(&mut rng, n, 8.0);
        let p = softmax(&logits);
        let mut y = vec![0.0; n];
        y[seed as usize % n] = 1.0;
        let ce = cross_entropy_loss(&y, &p).unwrap();
        assert!((ce - cross_entropy_ref(&y, &softmax_ref(&logits))).abs() < 1e-9);

        let yd = random_vec(&mut rng, 3 * n, 6.0);
        assert!((suppression_loss(&yd, Reduction::Sum) - suppression_ref(&yd)).abs() < 1e-9);

        let y1 = random_vec(&mut rng, n, 10.0);
        let y2 = random_vec(&mut rng, n, 10.0);
        let t = 0.5 + (seed as f64);
        assert!((refinement_loss(&y1, &y2, t).unwrap() - refinement_ref(&y1, &y2, t)).abs() < 1e-9);

        let (rows, cols) = (2 + seed as usize % 5, 1 + seed as usize % 7);
        let data = random_vec(&mut rng, rows * cols, 10.0);
        let sm = score_map(&EmbeddingMap::new(rows, cols, data.clone()).unwrap());
        let want = score_map_ref(rows, cols, &data);
        for (a, b) in sm.as_map().data().iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
        let scores = column_scores(&sm);
        assert_eq!(scores.len(), cols);
    }
}

#[test]
fn frozen_reference_values() {
    // mpmath at 50 digits
    let p = softmax(&[1.0f64, 2.0, 3.0]);
    for (a, b) in p.iter().zip([0.09003057317038046, 0.24472847105479765, 0.6652409557748219]) {
        assert!((a - b).abs() < 1e-15);
    }
    let ce = cross_entropy_loss(&[0.0f64, 1.0], &[0.2, 0.8]).unwrap();
    assert!((ce - 0.22314355131420976).abs() < 1e-15);
    assert!((suppression_loss(&[1.0f64], Reduction::Sum) - 3.103213970297504).abs() < 1e-14);
}

#[test]
fn temperature_halves_every_eleven_epochs() {
    let at = |epoch| {
        temperature_at_epoch(&RefinementSchedule {
            initial_temperature: 128.0f64,
            epoch,
        })
        .unwrap()
    };
    assert_eq!(at(0), 1.0);
    assert!((at(11) - 0.5).abs() < 1e-12);
    assert!((at(22) - 0.25).abs() < 1e-12);
    for e in 0..=110 {
        assert!((at(e + 11) - at(e) / 2.0).abs() < 1e-12, "epoch {e}");
    }
}

#[test]
fn refinement_loss_is_continuous_in_temperature() {
    let (y1, y2): ([f64; 4], [f64; 4]) = ([0.3, -1.2, 2.0, 0.0], [1.0, 0.5, -0.5, 0.2]);
    let mut prev = refinement_loss(&y1, &y2, 0.1).unwrap();
    let mut t = 0.1;
    while t < 50.0 {
        let next_t = t * 1.01;
        let next = refinement_loss(&y1, &y2, next_t).unwrap();
        assert!((next - prev).abs() < 0.05 * prev.max(1e-3), "jump at t = {t}");
        prev = next;
        t = next_t;
    }
}

#[test]
fn attention_uniform_case_is_exact() {
    for (c, h, w) in [(1, 1, 1), (3, 4, 5), (8, 2, 6), (16, 7, 7)] {
        let d = AttentionDescriptors {
            channel: vec![0.7; c],
            height: vec![0.3; h],
            width: vec![0.9; w],
        };
        let t = attention_normalize(&d, (c, h, w)).unwrap();
        let want = 1.0 / (c * h * w) as f64;
        assert!(t.data().iter().all(|&x| x == want), "{c}x{h}x{w}");
    }
}
