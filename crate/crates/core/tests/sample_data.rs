use htparse::corpus::{write_conll, WriteOptions};
use htparse::sample;

#[test]
fn bundled_sample_is_generator_output() {
    let mut buf = Vec::new();
    write_conll(&mut buf, &sample::generate(50, 7), &WriteOptions::default()).unwrap();
    let bundled = include_str!("../data/sample50.conll");
    assert_eq!(String::from_utf8(buf).unwrap(), bundled);
}
