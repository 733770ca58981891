use clap::Parser;
use proptest::prelude::*;
use wxline_cli::config::{keys, Settings, Source};
use wxline_cli::Cli;

#[derive(Clone, Copy, Debug)]
enum Layer {
    Default,
    File,
    CommandLine,
    Both,
}

fn layer() -> impl Strategy<Value = Layer> {
    prop_oneof![Just(Layer::Default), Just(Layer::File), Just(Layer::CommandLine), Just(Layer::Both)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn command_line_beats_file_beats_default(layers in prop::collection::vec(layer(), keys().len())) {
        let keys = keys();
        let defaults = Settings::default();
        let mut ini = String::new();
        let mut section = "";
        let mut argv = vec!["wxline".to_string()];
        for (i, (key, layer)) in keys.iter().zip(&layers).enumerate() {
            let (sec, name) = key.split_once('.').unwrap();
            if matches!(layer, Layer::File | Layer::Both) {
                if sec != section {
                    ini.push_str(&format!("[{sec}]\n"));
                    section = sec;
                }
                ini.push_str(&format!("{name} = file{i}\n"));
            }
            if matches!(layer, Layer::CommandLine | Layer::Both) {
                argv.extend(["--set".to_string(), format!("{key}=cli{i}")]);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wx.ini");
        std::fs::write(&path, ini).unwrap();
        argv.extend(["--config".to_string(), path.display().to_string(), "stats".to_string()]);

        let cli = Cli::try_parse_from(&argv).unwrap();
        let settings = Settings::resolve(cli.config.as_deref(), &cli.overrides()).unwrap();
        for (i, (key, layer)) in keys.iter().zip(&layers).enumerate() {
            let (value, source) = match layer {
                Layer::Default => (defaults.raw(key).to_string(), Source::Default),
                Layer::File => (format!("file{i}"), Source::File),
                Layer::CommandLine | Layer::Both => (format!("cli{i}"), Source::CommandLine),
            };
            prop_assert_eq!(settings.raw(key), value.as_str(), "{}", key);
            prop_assert_eq!(settings.source(key), source, "{}", key);
        }
    }
}

#[test]
fn dedicated_flags_beat_set_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wx.ini");
    std::fs::write(&path, "[node]\nbaud = 4800\nlisten = 0.0.0.0:1\n").unwrap();
    let cli = Cli::try_parse_from([
        "wxline",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "node.baud=19200",
        "node",
        "--baud",
        "9600",
    ])
    .unwrap();
    let settings = Settings::resolve(cli.config.as_deref(), &cli.overrides()).unwrap();
    assert_eq!(settings.raw("node.baud"), "9600");
    assert_eq!(settings.raw("node.listen"), "0.0.0.0:1");
    assert_eq!(settings.raw("node.station_id"), "1");
}
