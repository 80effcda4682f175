mod common;

use std::fs;

use trajhub::io::codec::{decode_sample, encode_sample};
use trajhub::io::{
    write_cache, CacheError, CacheReader, CacheWriter, DATA_FILE, MANIFEST_FILE,
};
use trajhub::preprocess::MaskedAttribute;
use trajhub::PreprocConfig;

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn samples_round_trip_bit_exact() {
    let samples = common::samples(3, 1);
    let dir = tempfile::tempdir().unwrap();
    let cfg = PreprocConfig::default();
    let manifest = write_cache(&samples, dir.path(), &cfg).unwrap();
    assert_eq!(manifest.sample_count as usize, samples.len());
    let r = CacheReader::open(dir.path()).unwrap();
    assert_eq!(r.config(), &cfg);
    for (i, s) in samples.iter().enumerate() {
        let back = r.get(i).unwrap();
        assert_eq!(bits(&back.focal_features), bits(&s.focal_features));
        assert_eq!(bits(&back.neighbor_features), bits(&s.neighbor_features));
        assert_eq!(bits(&back.map_features), bits(&s.map_features));
        assert_eq!(&back, s);
        assert_eq!(r.get_by_key(&s.sample_key).unwrap(), back);
    }
}

#[test]
fn codec_keeps_negative_zero_and_rejects_trailing_bytes() {
    let mut s = common::samples(1, 2).remove(0);
    s.focal_features[0] = -0.0;
    let enc = encode_sample(&s);
    let dec = decode_sample(&enc).unwrap();
    assert_eq!(dec.focal_features[0].to_bits(), (-0.0f64).to_bits());
    let mut longer = enc.clone();
    longer.push(0);
    assert!(decode_sample(&longer).is_err());
    assert!(decode_sample(&enc[..enc.len() - 1]).is_err());
}

#[test]
fn double_round_trip_is_byte_stable() {
    let samples = common::samples(2, 3);
    let cfg = PreprocConfig::default();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_cache(&samples, a.path(), &cfg).unwrap();
    let back: Vec<_> = CacheReader::open(a.path())
        .unwrap()
        .iter()
        .collect::<Result<_, _>>()
        .unwrap();
    write_cache(&back, b.path(), &cfg).unwrap();
    for f in [DATA_FILE, MANIFEST_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn corrupted_payload_names_the_entry() {
    let samples = common::samples(2, 4);
    let dir = tempfile::tempdir().unwrap();
    write_cache(&samples, dir.path(), &PreprocConfig::default()).unwrap();
    let path = dir.path().join(DATA_FILE);
    let mut bytes = fs::read(&path).unwrap();
    // First record starts after the 32-byte header and its 8-byte length.
    bytes[32 + 8 + 40] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    let r = CacheReader::open(dir.path()).unwrap();
    match r.get(0) {
        Err(CacheError::Checksum { entry }) => assert_eq!(entry, samples[0].sample_key),
        other => panic!("expected checksum error, got {other:?}"),
    }
    assert!(r.get(1).is_ok());
}

#[test]
fn truncated_or_mislabelled_files_are_rejected() {
    let samples = common::samples(1, 5);
    let dir = tempfile::tempdir().unwrap();
    write_cache(&samples, dir.path(), &PreprocConfig::default()).unwrap();
    let path = dir.path().join(DATA_FILE);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(CacheReader::open(dir.path()), Err(CacheError::Format(_))));

    fs::write(&path, &bytes).unwrap();
    let mpath = dir.path().join(MANIFEST_FILE);
    let text = fs::read_to_string(&mpath).unwrap();
    fs::write(&mpath, text.replace("\"past_sec\": 2.0", "\"past_sec\": 3.0")).unwrap();
    assert!(matches!(CacheReader::open(dir.path()), Err(CacheError::Format(_))));
}

#[test]
fn config_mismatch_lists_fields() {
    let samples = common::samples(1, 6);
    let dir = tempfile::tempdir().unwrap();
    write_cache(&samples, dir.path(), &PreprocConfig::default()).unwrap();
    let other = PreprocConfig {
        map_range_m: 50.0,
        masked_attributes: vec![MaskedAttribute::Heading],
        ..PreprocConfig::default()
    };
    match CacheReader::open_expecting(dir.path(), &other) {
        Err(CacheError::ConfigMismatch { fields }) => {
            assert!(fields.contains(&"map_range_m".to_string()), "{fields:?}");
            assert!(fields.contains(&"masked_attributes".to_string()), "{fields:?}");
        }
        other => panic!("expected mismatch, got {other:?}"),
    }
    assert!(CacheReader::open_expecting(dir.path(), &PreprocConfig::default()).is_ok());
}

#[test]
fn writer_guards() {
    let samples = common::samples(1, 7);
    let dir = tempfile::tempdir().unwrap();
    let mut w = CacheWriter::create(dir.path(), &PreprocConfig::default()).unwrap();
    w.push(&samples[0]).unwrap();
    assert!(matches!(w.push(&samples[0]), Err(CacheError::DuplicateKey(_))));

    let other = PreprocConfig { past_sec: 1.0, ..PreprocConfig::default() };
    let mut w2 = CacheWriter::create(dir.path().join("x"), &other).unwrap();
    assert!(matches!(w2.push(&samples[0]), Err(CacheError::ConfigMismatch { .. })));

    w.finish().unwrap();
    let r = CacheReader::open(dir.path()).unwrap();
    assert!(matches!(r.get(5), Err(CacheError::IndexOutOfRange { index: 5, len: 1 })));
    assert!(matches!(r.get_by_key("nope"), Err(CacheError::UnknownKey(_))));
}

#[test]
fn concurrent_reads_agree() {
    let samples = common::samples(3, 8);
    let dir = tempfile::tempdir().unwrap();
    write_cache(&samples, dir.path(), &PreprocConfig::default()).unwrap();
    let r = CacheReader::open(dir.path()).unwrap();
    std::thread::scope(|scope| {
        for t in 0..4 {
            let r = &r;
            let samples = &samples;
            scope.spawn(move || {
                for i in (t..samples.len()).step_by(4) {
                    assert_eq!(&r.get(i).unwrap(), &samples[i]);
                }
            });
        }
    });
}
