//! Oracle tests for the core transforms. Each oracle reimplements the
//! transform in the most literal style possible (per-pixel loops, f64
//! arithmetic, table lookups written out independently) so the production
//! code and the test cannot share a bug.

use std::collections::{BTreeMap, HashMap};

use g2r_core::semantic::class_id;
use g2r_core::{
    group_semantic_map, resize_bilinear, resize_semantic_nearest, stack_filtered_gbuffers,
    stencil_to_semantic, ClassGrouping, CoreError, GBufferId, GBufferSet, ImagePlane, Precision,
    SemanticMap, CLASS_COUNT, GROUP_COUNT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent statement of the class -> group table as explicit pairs.
/// Restates the assignment rather than reading it from the implementation.
fn oracle_group_table() -> HashMap<u8, u8> {
    let pairs: &[(u8, u8)] = &[
        (class_id::SKY, 0),
        (class_id::ROAD, 1),
        (class_id::ROAD_LINE, 1),
        (class_id::SIDEWALK, 2),
        (class_id::BUILDING, 3),
        (class_id::WALL, 4),
        (class_id::FENCE, 4),
        (class_id::GUARD_RAIL, 4),
        (class_id::POLE, 5),
        (class_id::STATIC, 5),
        (class_id::DYNAMIC, 5),
        (class_id::TRAFFIC_LIGHT, 6),
        (class_id::TRAFFIC_SIGN, 7),
        (class_id::VEGETATION, 8),
        (class_id::TERRAIN, 8),
        (class_id::PEDESTRIAN, 9),
        (class_id::RIDER, 9),
        (class_id::CAR, 10),
        (class_id::TRUCK, 10),
        (class_id::BUS, 10),
        (class_id::TRAIN, 10),
        (class_id::MOTORCYCLE, 10),
        (class_id::BICYCLE, 10),
        (class_id::UNLABELED, 11),
        (class_id::OTHER, 11),
        (class_id::WATER, 11),
        (class_id::GROUND, 11),
        (class_id::BRIDGE, 11),
        (class_id::RAIL_TRACK, 11),
    ];
    let map: HashMap<u8, u8> = pairs.iter().copied().collect();
    assert_eq!(map.len(), CLASS_COUNT, "oracle table must cover every class");
    map
}

fn random_semantic_map(rng: &mut ChaCha8Rng, w: u32, h: u32) -> SemanticMap {
    let classes = (0..w as usize * h as usize)
        .map(|_| rng.gen_range(0..CLASS_COUNT as u8))
        .collect();
    SemanticMap::new(w, h, classes).unwrap()
}

fn random_plane(rng: &mut ChaCha8Rng, w: u32, h: u32, c: u8) -> ImagePlane {
    let data = (0..w as usize * h as usize * c as usize)
        .map(|_| rng.gen_range(0.0f32..=1.0))
        .collect();
    ImagePlane::new(w, h, c, Precision::F32, data).unwrap()
}

fn full_gbuffer_set(rng: &mut ChaCha8Rng, frame_id: u64, w: u32, h: u32) -> GBufferSet {
    let mut buffers = BTreeMap::new();
    for id in GBufferId::ALL {
        if GBufferId::EXCLUDED_FROM_POLICIES.contains(&id) || id == GBufferId::CustomStencil {
            continue;
        }
        buffers.insert(id, random_plane(rng, w, h, id.channels()));
    }
    GBufferSet::new(frame_id, buffers).unwrap()
}

#[test]
fn standard_grouping_matches_oracle_table() {
    let grouping = ClassGrouping::standard();
    let oracle = oracle_group_table();
    for class in 0..CLASS_COUNT as u8 {
        assert_eq!(
            grouping.group_of(class),
            oracle[&class],
            "class {} ({})",
            class,
            g2r_core::semantic::CLASS_NAMES[class as usize]
        );
    }
}

#[test]
fn grouping_matches_relabel_oracle_and_partitions() {
    let grouping = ClassGrouping::standard();
    let oracle = oracle_group_table();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let w = rng.gen_range(1..24);
        let h = rng.gen_range(1..24);
        let map = random_semantic_map(&mut rng, w, h);
        let stack = group_semantic_map(&map, &grouping).unwrap();
        for y in 0..h {
            for x in 0..w {
                let expected_group = oracle[&map.class_at(x, y)];
                let mut hot = 0;
                for g in 0..GROUP_COUNT as u8 {
                    let bit = stack.mask_at(g, x, y);
                    if bit {
                        hot += 1;
                        assert_eq!(
                            g, expected_group,
                            "trial {trial}: wrong plane hot at ({x},{y})"
                        );
                    }
                }
                assert_eq!(hot, 1, "trial {trial}: pixel ({x},{y}) not one-hot");
            }
        }
    }
}

#[test]
fn stacking_matches_nested_loop_oracle() {
    let grouping = ClassGrouping::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let w = rng.gen_range(2..16);
        let h = rng.gen_range(2..16);
        let map = random_semantic_map(&mut rng, w, h);
        let onehot = group_semantic_map(&map, &grouping).unwrap();
        let set = full_gbuffer_set(&mut rng, 7, w, h);
        let streams = stack_filtered_gbuffers(&set, &onehot, &grouping).unwrap();

        for group in 0..GROUP_COUNT as u8 {
            let policy = grouping.policy(group);
            let tensor = &streams[&group];
            let expected_channels: usize = policy.iter().map(|b| b.channels() as usize).sum();
            assert_eq!(tensor.channels() as usize, expected_channels);

            // Walk policy order, buffer channel by buffer channel.
            let mut stacked = 0u16;
            for &id in policy {
                let plane = set.get(id).unwrap();
                for c in 0..id.channels() {
                    let out = tensor.channel(stacked);
                    for y in 0..h {
                        for x in 0..w {
                            let pix = (y * w + x) as usize;
                            let expected = if onehot.mask_at(group, x, y) {
                                plane.sample(x, y, c)
                            } else {
                                0.0
                            };
                            assert_eq!(
                                out[pix], expected,
                                "group {group} buffer {id:?} ch {c} at ({x},{y})"
                            );
                        }
                    }
                    stacked += 1;
                }
            }
        }
    }
}

#[test]
fn stacking_requires_matching_dimensions() {
    let grouping = ClassGrouping::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let map = random_semantic_map(&mut rng, 4, 4);
    let onehot = group_semantic_map(&map, &grouping).unwrap();
    let set = full_gbuffer_set(&mut rng, 1, 5, 4);
    let err = stack_filtered_gbuffers(&set, &onehot, &grouping).unwrap_err();
    assert!(matches!(err, CoreError::DimensionMismatch { .. }), "got {err:?}");
}

#[test]
fn stacking_reports_missing_buffer() {
    let grouping = ClassGrouping::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let map = random_semantic_map(&mut rng, 4, 4);
    let onehot = group_semantic_map(&map, &grouping).unwrap();
    let mut buffers = BTreeMap::new();
    buffers.insert(GBufferId::SceneColor, random_plane(&mut rng, 4, 4, 3));
    let set = GBufferSet::new(2, buffers).unwrap();
    let err = stack_filtered_gbuffers(&set, &onehot, &grouping).unwrap_err();
    assert!(matches!(err, CoreError::MissingBuffer { frame_id: 2, .. }), "got {err:?}");
}

/// Literal f64 reimplementation of the resize at a single output pixel.
fn bilinear_oracle(plane: &ImagePlane, tw: u32, th: u32, dx: u32, dy: u32, c: u8) -> f64 {
    let sw = plane.width() as f64;
    let sh = plane.height() as f64;
    let sx = (dx as f64 + 0.5) * sw / tw as f64 - 0.5;
    let sy = (dy as f64 + 0.5) * sh / th as f64 - 0.5;
    let x0 = sx.floor().clamp(0.0, sw - 1.0);
    let y0 = sy.floor().clamp(0.0, sh - 1.0);
    let x1 = (x0 + 1.0).min(sw - 1.0);
    let y1 = (y0 + 1.0).min(sh - 1.0);
    let fx = (sx - x0).clamp(0.0, 1.0);
    let fy = (sy - y0).clamp(0.0, 1.0);
    let at = |x: f64, y: f64| plane.sample(x as u32, y as u32, c) as f64;
    let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    let bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    top * (1.0 - fy) + bot * fy
}

#[test]
fn bilinear_matches_f64_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let sw = rng.gen_range(2..12);
        let sh = rng.gen_range(2..12);
        let tw = rng.gen_range(1..20);
        let th = rng.gen_range(1..20);
        let plane = random_plane(&mut rng, sw, sh, 3);
        let resized = resize_bilinear(&plane, tw, th).unwrap();
        for dy in 0..th {
            for dx in 0..tw {
                for c in 0..3 {
                    let got = resized.sample(dx, dy, c) as f64;
                    let want = bilinear_oracle(&plane, tw, th, dx, dy, c);
                    assert!(
                        (got - want).abs() < 1e-5,
                        "({dx},{dy},{c}): got {got}, oracle {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn bilinear_identity_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let plane = random_plane(&mut rng, 9, 7, 4);
    let same = resize_bilinear(&plane, 9, 7).unwrap();
    assert_eq!(plane, same);
}

#[test]
fn bilinear_preserves_constant_images() {
    let plane = ImagePlane::splat(6, 4, 3, Precision::F32, 0.37).unwrap();
    let resized = resize_bilinear(&plane, 13, 9).unwrap();
    for &v in resized.data() {
        assert!((v - 0.37).abs() < 1e-6);
    }
}

#[test]
fn nearest_resize_identity_and_label_preservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let map = random_semantic_map(&mut rng, 8, 6, );
    assert_eq!(resize_semantic_nearest(&map, 8, 6).unwrap(), map);

    let up = resize_semantic_nearest(&map, 19, 13).unwrap();
    // Every output label must exist in the source; nearest never invents one.
    for &c in up.classes() {
        assert!(map.classes().contains(&c));
    }
}

#[test]
fn stencil_round_trip_is_exact_for_all_classes() {
    let classes: Vec<u8> = (0..CLASS_COUNT as u8).collect();
    let data: Vec<f32> = classes.iter().map(|&c| c as f32 / 255.0).collect();
    let plane = ImagePlane::new(CLASS_COUNT as u32, 1, 1, Precision::U8, data).unwrap();
    let map = stencil_to_semantic(&plane).unwrap();
    assert_eq!(map.classes(), classes.as_slice());
}

#[test]
fn stencil_rejects_out_of_range_and_non_integral() {
    let plane = ImagePlane::new(1, 1, 1, Precision::U8, vec![40.0 / 255.0]).unwrap();
    let err = stencil_to_semantic(&plane).unwrap_err();
    assert!(matches!(err, CoreError::OutOfRangeClassId { pixel: 0, id: 40 }), "got {err:?}");

    let plane = ImagePlane::new(1, 1, 1, Precision::F32, vec![0.5]).unwrap();
    let err = stencil_to_semantic(&plane).unwrap_err();
    assert!(matches!(err, CoreError::NonIntegralStencil { pixel: 0, .. }), "got {err:?}");
}

#[test]
fn grouping_validation_rejects_bad_policies() {
    let base = ClassGrouping::standard();
    let names: Vec<String> = base.group_names().to_vec();
    let group_of: Vec<u8> = (0..CLASS_COUNT as u8).map(|c| base.group_of(c)).collect();

    // Sky must stack exactly [SceneColor].
    let mut policies: Vec<Vec<GBufferId>> = base.policies().to_vec();
    policies[0] = vec![GBufferId::SceneColor, GBufferId::SceneDepth];
    let err = ClassGrouping::new(group_of.clone(), names.clone(), policies).unwrap_err();
    assert!(matches!(err, CoreError::SkyPolicyViolation { .. }), "got {err:?}");

    // GBufferD is reserved for vegetation and vehicles.
    let mut policies: Vec<Vec<GBufferId>> = base.policies().to_vec();
    policies[3].push(GBufferId::GBufferD);
    let err = ClassGrouping::new(group_of.clone(), names.clone(), policies).unwrap_err();
    assert_eq!(err, CoreError::GBufferDPolicyViolation("building".into()));

    // Velocity and the E/F payload buffers are banned everywhere.
    for banned in GBufferId::EXCLUDED_FROM_POLICIES {
        let mut policies: Vec<Vec<GBufferId>> = base.policies().to_vec();
        policies[1].push(banned);
        let err = ClassGrouping::new(group_of.clone(), names.clone(), policies).unwrap_err();
        assert_eq!(err, CoreError::ForbiddenPolicyBuffer(banned));
    }

    // A group no class maps to is a configuration mistake.
    let mut orphan = group_of.clone();
    for g in orphan.iter_mut() {
        if *g == 7 {
            *g = 11;
        }
    }
    let err = ClassGrouping::new(orphan, names.clone(), base.policies().to_vec()).unwrap_err();
    assert_eq!(err, CoreError::EmptyGroup("traffic_sign".into()));
}

#[test]
fn image_plane_rejects_out_of_range_samples() {
    let err = ImagePlane::new(2, 1, 1, Precision::F32, vec![0.5, 1.5]).unwrap_err();
    assert!(matches!(err, CoreError::SampleOutOfRange { index: 1, .. }), "got {err:?}");
    let err = ImagePlane::new(1, 1, 1, Precision::F32, vec![f32::NAN]).unwrap_err();
    assert!(matches!(err, CoreError::SampleOutOfRange { index: 0, .. }), "got {err:?}");
}

#[test]
fn u8_round_trip_is_identity() {
    let bytes: Vec<u8> = (0..=255).collect();
    let plane = ImagePlane::from_u8(16, 16, 1, &bytes).unwrap();
    assert_eq!(plane.to_u8(), bytes);
}
