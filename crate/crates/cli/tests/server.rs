use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cellform_cli::assignment_file::{parse_assignment, AssignmentBody};
use cellform_cli::export::{InstanceEcho, SolutionExport};
use cellform_cli::server::{router, AppState};
use cellform_core::{analyze, builtin_instance, score, ClusterConfig, MetricsReport, BOCTOR_7X11_NAME};
use http_body_util::BodyExt;
use tower::ServiceExt;

const REFERENCE_CELLS: &str = "\
machine M1 2\nmachine M2 1\nmachine M3 1\nmachine M4 3\nmachine M5 2\nmachine M6 2\nmachine M7 3
part P1 1\npart P2 1\npart P3 2\npart P4 3\npart P5 3\npart P6 1\npart P7 2\npart P8 3\npart P9 1\npart P10 3\npart P11 2
";

fn boctor_app(ui_dir: Option<std::path::PathBuf>) -> Router {
    let inst = builtin_instance(BOCTOR_7X11_NAME).unwrap();
    let analysis = analyze(&inst, &ClusterConfig::with_cells(3)).unwrap();
    let export = SolutionExport::build(BOCTOR_7X11_NAME, &inst, &analysis).unwrap();
    router(Arc::new(AppState { instance: inst, export }), ui_dir)
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, bytes.to_vec())
}

fn post_score(body: &str) -> Request<Body> {
    Request::post("/api/score")
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap()
}

fn reference_cells_body() -> String {
    serde_json::to_string(&AssignmentBody::from(&parse_assignment(REFERENCE_CELLS).unwrap())).unwrap()
}

#[tokio::test]
async fn solution_endpoint_serves_the_export() {
    let app = boctor_app(None);
    let (status, bytes) = call(&app, Request::get("/api/solution").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let export: SolutionExport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(export.schema, "cellform/1");
    assert_eq!(export.n_cells, 3);
    assert_eq!(export.exceptional_parts, ["P1", "P4"]);
    let inst = export.instance.to_instance().unwrap();
    assert_eq!(score::<f64>(&inst, &export.assignment()).unwrap(), export.metrics);
}

#[tokio::test]
async fn instance_endpoint_echoes_the_matrix() {
    let app = boctor_app(None);
    let (status, bytes) = call(&app, Request::get("/api/instance").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    let echo: InstanceEcho = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(echo.to_instance().unwrap(), builtin_instance(BOCTOR_7X11_NAME).unwrap());
}

#[tokio::test]
async fn score_endpoint_matches_reference_cells() {
    let app = boctor_app(None);
    let (status, bytes) = call(&app, post_score(&reference_cells_body())).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    let report: MetricsReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!((report.ue, report.ee, report.ve), (21, 2, 6));
    assert_eq!(report.summary(), "PE 9.52% | MU 76.00% | GE 70.37%");
}

#[tokio::test]
async fn incomplete_assignment_names_the_missing_elements() {
    let app = boctor_app(None);
    let text = REFERENCE_CELLS.replace("part P4 3\n", "").replace("machine M7 3\n", "");
    let body = serde_json::to_string(&AssignmentBody::from(&parse_assignment(&text).unwrap())).unwrap();
    let (status, bytes) = call(&app, post_score(&body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    let msg = err["error"].as_str().unwrap();
    assert!(msg.contains("M7") && msg.contains("P4"), "{msg}");
}

#[tokio::test]
async fn unknown_machine_is_rejected() {
    let app = boctor_app(None);
    let body = reference_cells_body().replace("\"M7\"", "\"M9\"");
    let (status, bytes) = call(&app, post_score(&body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(String::from_utf8_lossy(&bytes).contains("M9"));
}

#[tokio::test]
async fn malformed_json_is_a_client_error() {
    let app = boctor_app(None);
    let (status, _) = call(&app, post_score("{not json")).await;
    assert!(status.is_client_error());
}

#[tokio::test]
async fn concurrent_scores_do_not_interfere() {
    let app = boctor_app(None);
    let reference_cells = reference_cells_body();
    let moved = reference_cells.replace("\"P4\":3", "\"P4\":2");
    let tasks: Vec<_> = (0..32)
        .map(|k| {
            let app = app.clone();
            let body = if k % 2 == 0 { reference_cells.clone() } else { moved.clone() };
            tokio::spawn(async move {
                let (status, bytes) = call(&app, post_score(&body)).await;
                assert_eq!(status, StatusCode::OK);
                (k, serde_json::from_slice::<MetricsReport>(&bytes).unwrap())
            })
        })
        .collect();
    for t in tasks {
        let (k, report) = t.await.unwrap();
        let expected_ve = if k % 2 == 0 { 6 } else { 7 };
        assert_eq!(report.ve, expected_ve);
    }
}

#[tokio::test]
async fn root_serves_placeholder_or_ui_dir() {
    let app = boctor_app(None);
    let (status, bytes) = call(&app, Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8_lossy(&bytes).contains("cellform"));

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>designer</p>").unwrap();
    let app = boctor_app(Some(dir.path().to_owned()));
    let (status, bytes) = call(&app, Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"<p>designer</p>");
    let (status, _) = call(&app, Request::get("/api/instance").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
}

#[test]
fn busy_port_exits_nonzero() {
    let holder = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port();
    let out = Command::new(env!("CARGO_BIN_EXE_cellform"))
        .args(["serve", "--builtin", BOCTOR_7X11_NAME, "--port", &port.to_string()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot bind port"));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    stream.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut resp = String::new();
    stream.read_to_string(&mut resp).ok()?;
    Some(resp)
}

#[test]
fn serve_answers_over_tcp() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_cellform"))
        .args(["serve", "--builtin", BOCTOR_7X11_NAME, "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let resp = loop {
        if let Some(r) = http_get(port, "/api/instance") {
            break Some(r);
        }
        if Instant::now() > deadline {
            break None;
        }
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    let _ = child.wait();
    let resp = resp.expect("server came up");
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"boctor-7x11\""));
}

#[tokio::test]
async fn api_and_cli_scores_agree() {
    let dir = tempfile::tempdir().unwrap();
    let moved = REFERENCE_CELLS.replace("part P4 3", "part P4 2");
    let asg = dir.path().join("moved.asg");
    std::fs::write(&asg, &moved).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cellform"))
        .args(["score", "--builtin", BOCTOR_7X11_NAME, "--json", "--assignment"])
        .arg(&asg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let cli: MetricsReport = serde_json::from_slice(&out.stdout).unwrap();

    let body = serde_json::to_string(&AssignmentBody::from(&parse_assignment(&moved).unwrap())).unwrap();
    let (status, bytes) = call(&boctor_app(None), post_score(&body)).await;
    assert_eq!(status, StatusCode::OK);
    let api: MetricsReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(api, cli);
    assert!((api.ge - 100.0 * 19.0 / 28.0).abs() < 1e-12);
}
