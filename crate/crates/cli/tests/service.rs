//! HTTP API tests driven in-process through the router.

use std::time::{Duration, Instant};

use altjulia_cli::png_out::{self, TRANSPARENT};
use altjulia_cli::server::{router, ServerConfig};
use altjulia_core::{
    classify, membership, Axis4, Complex64, ConnectivityClass, IterationConfig, MapParams, Membership, SliceSpec,
    Viewport,
};
use axum::body::{Body, Bytes};
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    headers: HeaderMap,
    body: Bytes,
}

impl Reply {
    fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).expect("json body")
    }

    fn header(&self, name: &str) -> &str {
        self.headers
            .get(name)
            .unwrap_or_else(|| panic!("missing header {name}"))
            .to_str()
            .unwrap()
    }

    fn header_f64(&self, name: &str) -> f64 {
        self.header(name).parse().unwrap()
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    let response = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let body = response.into_body().collect().await.unwrap().to_bytes();
    Reply { status, headers, body }
}

fn app() -> Router {
    router(ServerConfig::default())
}

fn rgba_at(pixels: &[u8], width: u32, col: u32, row: u32) -> [u8; 4] {
    let i = 4 * (row as usize * width as usize + col as usize);
    pixels[i..i + 4].try_into().unwrap()
}

#[tokio::test]
async fn health_reports_version() {
    let reply = get(&app(), "/api/health").await;
    assert_eq!(reply.status, StatusCode::OK);
    let doc = reply.json();
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["res_cap"], 2048);
}

#[tokio::test]
async fn classify_origin_is_connected() {
    let reply = get(&app(), "/api/classify?c1re=0&c1im=0&c2re=0&c2im=0").await;
    assert_eq!(reply.status, StatusCode::OK);
    let doc = reply.json();
    assert_eq!(doc["class"], "connected");
    assert_eq!(doc["locus"], "cl");
    assert_eq!(doc["fate_zero"]["fate"], "bounded_periodic");
    assert_eq!(doc["period"], 1);
    assert_eq!(doc["low_confidence"], false);
    assert_eq!(doc["config"]["max_quartic_iters"], 500);
}

#[tokio::test]
async fn classify_document_matches_library_call() {
    let app = app();
    for (c1re, c1im, c2re, c2im) in [
        (-0.8, 0.2, -0.4, 0.0),
        (0.0, 0.2, -0.4, 0.0),
        (5.0, 0.0, -25.0, 0.0),
        (12.0, 0.0, -3.0, 4.0),
    ] {
        let reply = get(
            &app,
            &format!("/api/classify?c1re={c1re}&c1im={c1im}&c2re={c2re}&c2im={c2im}&iters=300"),
        )
        .await;
        assert_eq!(reply.status, StatusCode::OK);
        let config = IterationConfig {
            max_quartic_iters: 300,
            ..IterationConfig::default()
        };
        let expected = classify(&MapParams::from_parts(c1re, c1im, c2re, c2im), &config);
        let doc = reply.json();
        assert_eq!(doc["class"], expected.class.name());
        assert_eq!(doc["fate_zero"], serde_json::to_value(expected.fate_zero).unwrap());
        assert_eq!(doc["fate_crit"], serde_json::to_value(expected.fate_crit).unwrap());
        assert_eq!(doc["period"], serde_json::to_value(expected.period()).unwrap());
        assert_eq!(doc["low_confidence"], expected.low_confidence);
    }
}

#[tokio::test]
async fn classify_rejects_malformed_parameters() {
    let app = app();
    for uri in [
        "/api/classify?c1re=abc&c1im=0&c2re=0&c2im=0",
        "/api/classify?c1re=0&c1im=0&c2re=0",
        "/api/classify?c1re=NaN&c1im=0&c2re=0&c2im=0",
        "/api/classify?c1re=0&c1im=0&c2re=0&c2im=inf",
        "/api/classify?c1re=0&c1im=0&c2re=0&c2im=0&iters=0",
        "/api/classify?c1re=0&c1im=0&c2re=0&c2im=0&iters=1000000",
    ] {
        let reply = get(&app, uri).await;
        assert_eq!(reply.status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(reply.json()["error"].is_string());
    }
}

#[tokio::test]
async fn slice_pixels_follow_classification_and_headers_map_back() {
    let app = app();
    let reply = get(&app, "/api/slice?fix1=re2:-0.4&fix2=im2:0&res=256").await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.header("content-type"), "image/png");
    assert_eq!(reply.header("x-slice-fixed"), "re2:-0.4,im2:0");
    assert_eq!(
        (reply.header("x-slice-x-axis"), reply.header("x-slice-y-axis")),
        ("re1", "im1")
    );
    assert!(reply.header("access-control-expose-headers").contains("x-slice-x-min"));
    let (w, h, channels, pixels) = png_out::decode(&reply.body).unwrap();
    assert_eq!((w, h, channels), (256, 256, 4));

    let (xmin, xmax) = (reply.header_f64("x-slice-x-min"), reply.header_f64("x-slice-x-max"));
    let (ymin, ymax) = (reply.header_f64("x-slice-y-min"), reply.header_f64("x-slice-y-max"));
    let spec = SliceSpec::new([(Axis4::Re2, -0.4), (Axis4::Im2, 0.0)], 256).unwrap();
    let config = IterationConfig::default();
    let mut seen = [0usize; 3];
    // three reference points on the row im1 = 0.2, plus a spread of cells
    let mut cells = vec![];
    for (re, im) in [(-0.8, 0.2), (-0.4, 0.2), (0.0, 0.2)] {
        let col = ((re - xmin) / (xmax - xmin) * w as f64) as u32;
        let row = ((ymax - im) / (ymax - ymin) * h as f64) as u32;
        cells.push((col, row));
    }
    cells.extend(
        (0..256)
            .step_by(17)
            .flat_map(|c| (0..256).step_by(23).map(move |r| (c, r))),
    );
    for (col, row) in cells {
        // pixel centre as the explorer computes it from the headers
        let re = xmin + (col as f64 + 0.5) * (xmax - xmin) / w as f64;
        let im = ymax - (row as f64 + 0.5) * (ymax - ymin) / h as f64;
        let (xi, yi) = (col, h - 1 - row);
        let params = spec.params_at(xi, yi);
        assert!((params.c1.re - re).abs() < 1e-12 && (params.c1.im - im).abs() < 1e-12);
        let class = classify(&params, &config).class;
        seen[class.code() as usize] += 1;
        let expected = match class {
            ConnectivityClass::Connected => [255, 0, 0, 255],
            ConnectivityClass::Disconnected => [0, 0, 255, 255],
            ConnectivityClass::TotallyDisconnected => TRANSPARENT,
        };
        assert_eq!(rgba_at(&pixels, w, col, row), expected, "cell ({col}, {row})");
    }
    assert!(seen[ConnectivityClass::Connected.code() as usize] > 0);
    assert!(seen[ConnectivityClass::TotallyDisconnected.code() as usize] > 0);
}

#[tokio::test]
async fn single_cell_slice_at_origin_is_red() {
    let reply = get(&app(), "/api/slice?fix1=re2:0&fix2=im2:0&res=1&min=-1&max=1").await;
    assert_eq!(reply.status, StatusCode::OK);
    let (w, h, _, pixels) = png_out::decode(&reply.body).unwrap();
    assert_eq!((w, h), (1, 1));
    assert_eq!(pixels, [255, 0, 0, 255]);
    assert_eq!(reply.header("x-slice-counts"), "cl=1,dl=0,tdl=0");
}

#[tokio::test]
async fn slice_window_overrides_per_axis() {
    let reply = get(
        &app(),
        "/api/slice?fix1=im1:0&fix2=im2:0&res=8&xmin=-1&xmax=0&ymin=0.25&ymax=0.5",
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.header("x-slice-x-axis"), "re1");
    assert_eq!(reply.header("x-slice-y-axis"), "re2");
    assert_eq!(reply.header_f64("x-slice-x-min"), -1.0);
    assert_eq!(reply.header_f64("x-slice-y-max"), 0.5);
}

#[tokio::test]
async fn slice_rejects_invalid_requests() {
    let app = app();
    for uri in [
        "/api/slice?fix1=re1:0&fix2=re1:0",
        "/api/slice?fix1=re1:0",
        "/api/slice?fix1=re9:0&fix2=im1:0",
        "/api/slice?fix1=re1:x&fix2=im1:0",
        "/api/slice?fix1=re1:0&fix2=im1:0&res=0",
        "/api/slice?fix1=re1:0&fix2=im1:0&res=2049",
        "/api/slice?fix1=re1:0&fix2=im1:0&min=1&max=-1",
    ] {
        let reply = get(&app, uri).await;
        assert_eq!(reply.status, StatusCode::BAD_REQUEST, "{uri}");
    }
}

#[tokio::test]
async fn julia_origin_has_centered_disk() {
    let reply = get(
        &app(),
        "/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&cre=0&cim=0&hw=1.5&res=128",
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK);
    let (w, h, channels, pixels) = png_out::decode(&reply.body).unwrap();
    assert_eq!((w, h, channels), (128, 128, 3));
    let px = |x: u32, y: u32| -> [u8; 3] {
        let i = 3 * (y as usize * w as usize + x as usize);
        pixels[i..i + 3].try_into().unwrap()
    };
    assert_eq!(px(64, 64), altjulia_cli::JULIA_INTERIOR);
    assert_ne!(px(0, 0), altjulia_cli::JULIA_INTERIOR);
    let interior = pixels.chunks(3).filter(|p| *p == altjulia_cli::JULIA_INTERIOR).count();
    let expected = std::f64::consts::PI / 9.0 * (w * h) as f64;
    assert!(
        (interior as f64 - expected).abs() / expected < 0.02,
        "{interior} vs {expected}"
    );
    assert_eq!(reply.header("x-julia-interior-count"), interior.to_string());
}

#[tokio::test]
async fn julia_interior_matches_membership_oracle() {
    let reply = get(&app(), "/api/julia?c1re=0&c1im=0.2&c2re=-0.4&c2im=0&res=64&hw=1.6").await;
    assert_eq!(reply.status, StatusCode::OK);
    let (w, _, _, pixels) = png_out::decode(&reply.body).unwrap();
    let params = MapParams::from_parts(0.0, 0.2, -0.4, 0.0);
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 1.6, 64);
    let config = IterationConfig::default();
    for y in 0..64 {
        for x in 0..64 {
            let i = 3 * (y * w as usize + x);
            let inside = pixels[i..i + 3] == altjulia_cli::JULIA_INTERIOR;
            let m = membership(vp.pixel_center(x as u32, y as u32), &params, &config);
            assert_eq!(inside, m == Membership::Interior, "pixel ({x}, {y})");
        }
    }
}

#[tokio::test]
async fn julia_rejects_invalid_requests() {
    let app = app();
    for uri in [
        "/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&hw=0",
        "/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&hw=-1",
        "/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&res=4096",
        "/api/julia?c1re=0&c1im=0&c2re=0",
    ] {
        assert_eq!(get(&app, uri).await.status, StatusCode::BAD_REQUEST, "{uri}");
    }
}

#[tokio::test]
async fn identical_requests_return_identical_bytes() {
    let uris = [
        "/api/slice?fix1=re1:0&fix2=im1:-1.05&res=64",
        "/api/julia?c1re=-0.4&c1im=0.2&c2re=-0.4&c2im=0&res=64",
        "/api/classify?c1re=-0.4&c1im=0.2&c2re=-0.4&c2im=0",
    ];
    let first = app();
    let second = app();
    for uri in uris {
        let a = get(&first, uri).await;
        let b = get(&first, uri).await; // cached
        let c = get(&second, uri).await; // fresh server
        assert_eq!(a.status, StatusCode::OK);
        assert_eq!(a.body, b.body, "{uri}");
        assert_eq!(a.body, c.body, "{uri}");
        assert_eq!(a.headers.get("x-slice-counts"), c.headers.get("x-slice-counts"));
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_match_serial_execution() {
    let uris: Vec<String> = (0..12)
        .map(|i| match i % 3 {
            0 => format!("/api/slice?fix1=re2:{}&fix2=im2:0&res=48", -0.1 * i as f64),
            1 => format!("/api/julia?c1re={}&c1im=0.2&c2re=-0.4&c2im=0&res=48", -0.05 * i as f64),
            _ => format!("/api/classify?c1re={}&c1im=0.2&c2re=-0.4&c2im=0", -0.1 * i as f64),
        })
        .collect();
    let serial_app = app();
    let mut serial = Vec::new();
    for uri in &uris {
        serial.push(get(&serial_app, uri).await.body);
    }
    let concurrent_app = router(ServerConfig {
        heavy_jobs: uris.len(),
        ..ServerConfig::default()
    });
    let handles: Vec<_> = uris
        .iter()
        .map(|uri| {
            let app = concurrent_app.clone();
            let uri = uri.clone();
            tokio::spawn(async move { get(&app, &uri).await })
        })
        .collect();
    for (handle, expected) in handles.into_iter().zip(serial) {
        let reply = handle.await.unwrap();
        assert_eq!(reply.status, StatusCode::OK);
        assert_eq!(reply.body, expected);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn saturated_render_slots_return_503_and_recover() {
    let app = router(ServerConfig {
        heavy_jobs: 1,
        ..ServerConfig::default()
    });
    // a render that takes seconds and holds the only slot
    let spawn_slow = || {
        let app = app.clone();
        tokio::spawn(async move { get(&app, "/api/slice?fix1=re1:0&fix2=im1:-1.05&res=2048&iters=2000").await })
    };
    let mut slow = spawn_slow();
    let deadline = Instant::now() + Duration::from_secs(30);
    let mut busy = None;
    let mut i = 0;
    while Instant::now() < deadline {
        i += 1;
        // a probe may win the slot before the slow render starts; try again
        if slow.is_finished() {
            slow = spawn_slow();
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
        let reply = get(
            &app,
            &format!("/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&res=8&hw={}", 1.0 + i as f64),
        )
        .await;
        if reply.status == StatusCode::SERVICE_UNAVAILABLE {
            busy = Some(reply);
            break;
        }
    }
    let busy = busy.expect("no 503 while the only render slot was taken");
    assert!(busy.json()["error"].is_string());
    assert_eq!(busy.header("retry-after"), "1");
    // classification does not need a render slot
    let reply = get(&app, "/api/classify?c1re=0&c1im=0&c2re=0&c2im=0").await;
    assert_eq!(reply.status, StatusCode::OK);

    // dropping the request cancels the render and frees the slot
    slow.abort();
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let reply = get(&app, "/api/julia?c1re=0&c1im=0&c2re=0&c2im=0&res=8&hw=0.5").await;
        if reply.status == StatusCode::OK {
            break;
        }
        assert!(Instant::now() < deadline, "render slot never freed");
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
}

#[tokio::test]
async fn root_serves_explorer_page() {
    let reply = get(&app(), "/").await;
    assert_eq!(reply.status, StatusCode::OK);
    assert!(reply.header("content-type").starts_with("text/html"));
    assert!(std::str::from_utf8(&reply.body).unwrap().contains("/api/slice"));
}

#[tokio::test]
async fn root_serves_ui_bundle_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>bundle</html>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let app = router(ServerConfig {
        ui_dir: Some(dir.path().to_path_buf()),
        ..ServerConfig::default()
    });
    let reply = get(&app, "/").await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(&reply.body[..], b"<html>bundle</html>");
    assert_eq!(get(&app, "/app.js").await.status, StatusCode::OK);
    assert_eq!(get(&app, "/api/health").await.status, StatusCode::OK);
}
