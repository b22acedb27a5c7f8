use magnitude_core::fixtures::{all_fixtures, digit_separated_space, tetrahedron};
use magnitude_core::formal::path_expansion;
use magnitude_core::io::{parse_space_json, space_to_json};
use magnitude_core::metric::are_isometric;
use magnitude_core::rational::int;
use magnitude_core::reconstruction::{reconstruct, Mode, ReconstructionInput};
use magnitude_core::small_scale::m1_n4_closed;
use magnitude_core::GeneralizedSeries;

#[test]
fn series_text_survives_a_file_roundtrip() {
    for f in all_fixtures() {
        let s = path_expansion(&f.space, 3).unwrap().series;
        let text = s.to_string();
        let back: GeneralizedSeries = text.parse().unwrap();
        assert_eq!(back, s, "{}", f.name);
        assert_eq!(back.to_string(), text);
    }
}

#[test]
fn reconstruct_from_serialised_data() {
    let s = tetrahedron(&[9, 11, 7, 12, 8, 10].map(int)).unwrap();
    let space = parse_space_json(&space_to_json(&s)).unwrap();
    let series: GeneralizedSeries = path_expansion(&space, 3).unwrap().series.to_string().parse().unwrap();
    let input = ReconstructionInput::Series { series, m1: Some(m1_n4_closed(&space).unwrap()) };
    let r = reconstruct(&input, Mode::Auto).unwrap();
    assert_eq!(r.certificate.applied, "n4_svti");
    assert!(are_isometric(&s, &r.space).unwrap().is_some());
}

#[test]
fn generic_routes_agree() {
    let s = digit_separated_space(5, 42).unwrap();
    let input = ReconstructionInput::of_space(&s, Mode::Ri, 5).unwrap();
    let a = reconstruct(&input, Mode::Ri).unwrap();
    let b = reconstruct(&input, Mode::SvtiGeneric).unwrap();
    assert!(are_isometric(&a.space, &b.space).unwrap().is_some());
    assert!(are_isometric(&s, &a.space).unwrap().is_some());
    // a series cut below the 3-edge sums cannot determine the space
    let short = ReconstructionInput::of_space(&s, Mode::Ri, 1).unwrap();
    assert!(reconstruct(&short, Mode::Ri).is_err());
}
