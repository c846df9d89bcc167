use posterkit_core::forge::{Forge, GenerationConfig};
use posterkit_core::loss::tensor_io::{read_tensor, write_tensor};
use posterkit_core::loss::{flow_loss, Tensor};
use posterkit_core::ocr::{align_chars, evaluate_pair};
use proptest::prelude::*;

fn small_forge(seed: u64) -> Forge {
    let config = GenerationConfig { master_seed: seed, canvas_size: [256, 256], ..Default::default() };
    Forge::builtin(config).unwrap()
}

#[test]
fn plans_depend_only_on_seed_and_index() {
    let a = small_forge(11);
    let b = small_forge(11);
    for i in [0, 1, 17, 4096] {
        assert_eq!(a.plan(i), b.plan(i));
    }
    assert_ne!(small_forge(12).plan(0).seed, a.plan(0).seed);
}

#[test]
fn generated_image_matches_canvas() {
    let sample = small_forge(3).generate(5).unwrap();
    assert_eq!(sample.image.dimensions(), (256, 256));
    assert_eq!(sample.plan, small_forge(3).plan(5));
}

#[test]
fn identical_strings_score_perfectly() {
    let (_, m) = evaluate_pair("Summer Jazz Night", "summer jazz night!");
    assert_eq!((m.accuracy, m.precision, m.recall, m.f_score), (1.0, 1.0, 1.0, 1.0));
}

proptest! {
    #[test]
    fn counts_cover_both_strings(gt in "[a-d]{0,12}", ocr in "[a-d]{0,12}") {
        let c = align_chars(&gt, &ocr);
        prop_assert_eq!(c.correct + c.substitutions + c.deletions, gt.len());
        prop_assert_eq!(c.correct + c.substitutions + c.insertions, ocr.len());
    }

    #[test]
    fn tensors_round_trip(data in prop::collection::vec(-1e6f64..1e6, 1..64)) {
        let t = Tensor::vector(data.iter().map(|v| *v as f32 as f64).collect());
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        prop_assert_eq!(read_tensor(&buf[..]).unwrap(), t);
    }

    #[test]
    fn flow_loss_is_zero_only_on_match(data in prop::collection::vec(-10.0f64..10.0, 1..32), k in 0usize..32) {
        let t = Tensor::vector(data.clone());
        prop_assert_eq!(flow_loss(&t, &t).unwrap(), 0.0);
        let mut moved = data;
        let k = k % moved.len();
        moved[k] += 1.0;
        prop_assert!(flow_loss(&Tensor::vector(moved), &t).unwrap() > 0.0);
    }
}
