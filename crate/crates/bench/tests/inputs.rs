use numgame_bench::{fixture, ones};

#[test]
fn bench_inputs_exist_and_start_strongly_dominant() {
    for name in ["e8", "h3", "h4"] {
        let g = fixture(name);
        assert!(ones(&g).is_strongly_dominant(), "{name}");
    }
}
