mod support;

use std::path::Path;
use std::process::{Command, Output};

use decompose_core::{load_image, save_png, PaletteDocument};
use serde_json::Value;

fn decompose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decompose"))
        .args(args)
        .output()
        .expect("run decompose")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn last_json_line(bytes: &[u8]) -> Value {
    let text = String::from_utf8_lossy(bytes);
    serde_json::from_str(text.lines().last().expect("some output")).unwrap()
}

#[test]
fn palette_solve_composite_recolor() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("synthetic.png");
    save_png(&support::synthetic_image(64, 64), &image).unwrap();
    let palette = dir.path().join("palette.json");

    let out = decompose(&["palette", path(&image), "--seed", "3", "-o", path(&palette)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: PaletteDocument = serde_json::from_slice(&std::fs::read(&palette).unwrap()).unwrap();
    assert_eq!(doc.colors.len(), 4);
    let order = support::truth_order(&doc.colors)
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");

    let layers = dir.path().join("layers");
    let out = decompose(&[
        "solve", path(&image), path(&palette), "--order", &order, "--w-opaque", "100",
        "--w-spatial", "1000", "-o", path(&layers),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = last_json_line(&out.stdout);
    assert!(report["rmse"].as_f64().unwrap() < 1.0, "{report}");
    assert!(layers.join("manifest.json").is_file());
    assert!(layers.join("layer_002.png").is_file());

    let recomposed = dir.path().join("recomposed.png");
    let out = decompose(&["composite", path(&layers), "-o", path(&recomposed), "--reference", path(&image)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(last_json_line(&out.stdout)["rmse"].as_f64().unwrap() < 1.0);
    assert_eq!(load_image(&recomposed).unwrap().width(), 64);

    let recolored = dir.path().join("recolored.png");
    let out = decompose(&["recolor", path(&layers), "--layer", "2", "--color", "0,0,0", "-o", path(&recolored)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_ne!(load_image(&recolored).unwrap(), load_image(&recomposed).unwrap());

    let out = decompose(&["recolor", path(&layers), "--layer", "9", "--color", "0,0,0", "-o", path(&recolored)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(last_json_line(&out.stderr)["error"]["kind"], "index_out_of_range");
}

#[test]
fn palette_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("synthetic.png");
    save_png(&support::synthetic_image(48, 48), &image).unwrap();
    let a = decompose(&["palette", path(&image), "--seed", "7", "--bandwidth", "40"]);
    let b = decompose(&["palette", path(&image), "--seed", "7", "--bandwidth", "40"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: PaletteDocument = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc.params.unwrap().seed, 7);
}

#[test]
fn repeated_order_index_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("synthetic.png");
    save_png(&support::synthetic_image(16, 16), &image).unwrap();
    let palette = dir.path().join("palette.json");
    std::fs::write(
        &palette,
        r#"{"colors": [[0,0,0],[255,0,0],[0,0,255]], "background_index": 0, "source": "user-edited"}"#,
    )
    .unwrap();
    let out = decompose(&["solve", path(&image), path(&palette), "--order", "1,1,2", "-o", path(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = last_json_line(&out.stderr);
    assert_eq!(err["error"]["kind"], "invalid_parameter");
    assert!(err["error"]["message"].as_str().unwrap().contains("permutation"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(decompose(&[]).status.code(), Some(2));
    assert_eq!(decompose(&["palette"]).status.code(), Some(2));
    assert_eq!(decompose(&["solve", "a.png", "p.json", "-o", "out"]).status.code(), Some(2));
    assert_eq!(decompose(&["palette", "a.png", "--inside", "lots"]).status.code(), Some(2));
    assert!(decompose(&["--help"]).status.success());
}

#[test]
fn runtime_errors_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = decompose(&["palette", path(&dir.path().join("missing.png"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = last_json_line(&out.stderr);
    assert_eq!(err["error"]["kind"], "missing_file");
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.png"));

    let text = dir.path().join("notes.png");
    std::fs::write(&text, "hello").unwrap();
    let out = decompose(&["palette", path(&text)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(last_json_line(&out.stderr)["error"]["kind"], "unsupported_image");

    let out = decompose(&["composite", path(dir.path()), "-o", path(&dir.path().join("o.png"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(last_json_line(&out.stderr)["error"]["kind"], "missing_file");
}

#[test]
fn serve_answers_http() {
    use std::io::{BufRead, BufReader, Read, Write};
    let mut child = Command::new(env!("CARGO_BIN_EXE_decompose"))
        .args(["serve", "--port", "0"])
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = serde_json::from_str::<Value>(&line).unwrap()["listening"]
        .as_str()
        .unwrap()
        .to_string();
    let mut stream = std::net::TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "POST /sessions HTTP/1.1\r\nHost: {addr}\r\nContent-Length: 4\r\nConnection: close\r\n\r\nnope"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 415"), "{response}");
}
