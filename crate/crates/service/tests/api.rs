use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{Duration, TimeZone, Utc};
use http_body_util::BodyExt;
use mailalias::{api, App, FixedClock, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn john() -> Value {
    json!({"name": "John Smith", "line1": "123 Main Street", "line2": "Unit 456",
           "city": "Any Town", "state": "NY", "zip": "12345"})
}

fn setup() -> (Router, Arc<FixedClock>) {
    let clock = Arc::new(FixedClock::new(Utc.with_ymd_and_hms(2025, 5, 1, 9, 0, 0).unwrap()));
    let app = App::ephemeral(ServiceConfig::default(), clock.clone()).unwrap();
    (api::router(Arc::new(app)), clock)
}

async fn call(router: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

#[tokio::test]
async fn issue_lookup_revoke_round_trip() {
    let (r, _) = setup();
    let (s, rec) = call(&r, "POST", "/aliases", Some(json!({"true_address": john(), "merchant_domain": "shop.example"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(rec["status"], "Issued");
    assert_eq!(rec["merchant_domain"], "shop.example");
    assert_eq!(rec["alias_address"]["zip"], "12345");
    let handle = rec["handle"].as_str().unwrap().to_string();
    let digits = rec["digits"].as_str().unwrap().to_string();

    let (s, by_handle) = call(&r, "GET", &format!("/aliases/{handle}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(by_handle, rec);
    let (_, by_digits) = call(&r, "GET", &format!("/aliases/{digits}"), None).await;
    assert_eq!(by_digits, rec);

    let sc = rec["short_code"].as_str().unwrap();
    let (s, by_sc) = call(&r, "GET", &format!("/aliases?short_code={sc}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(by_sc["handle"], handle.as_str());

    let (s, revoked) = call(&r, "POST", &format!("/aliases/{handle}/revoke"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(revoked["status"], "Revoked");
    let (s, _) = call(&r, "POST", &format!("/aliases/{handle}/revoke"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let (_, list) = call(&r, "GET", "/aliases", None).await;
    assert_eq!(list.as_array().unwrap().len(), 1);
    assert_eq!(list[0]["status"], "Revoked");
}

#[tokio::test]
async fn batch_issue_returns_a_list() {
    let (r, _) = setup();
    let (s, v) = call(&r, "POST", "/aliases", Some(json!({"true_address": john(), "count": 3}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v.as_array().unwrap().len(), 3);
    let (s, _) = call(&r, "POST", "/aliases", Some(json!({"true_address": john(), "count": 0}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn bad_input_maps_to_client_errors() {
    let (r, _) = setup();
    let mut bad = john();
    bad["state"] = json!("ZZ");
    let (s, v) = call(&r, "POST", "/aliases", Some(json!({"true_address": bad}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].is_string());
    let (s, _) = call(&r, "GET", "/aliases/12345-00000000000000000001", None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "check digit is wrong");
    let (s, _) = call(&r, "GET", "/aliases/12345-00000000000000000000", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&r, "GET", "/aliases?short_code=22222222", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&r, "GET", "/parcels/PCL-00000009/tracking", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn validate_endpoint_knows_aliases() {
    let (r, _) = setup();
    let unknown = json!({"name": "Nobody", "line1": "1 Nowhere Road", "city": "Any Town", "state": "NY", "zip": "12345"});
    let (s, v) = call(&r, "POST", "/validate", Some(json!({"address": unknown}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["result"], "Invalid");
    let (_, v) = call(&r, "POST", "/validate", Some(json!({"address": unknown, "mode": "Soft"}))).await;
    assert_eq!(v["decision"], "ProceedWithWarning");

    let (_, rec) = call(&r, "POST", "/aliases", Some(json!({"true_address": john()}))).await;
    let (_, v) = call(&r, "POST", "/validate", Some(json!({"address": rec["alias_address"], "mode": "Hard"}))).await;
    assert_eq!(v["result"], "Valid");
    assert_eq!(v["decision"], "Proceed");
}

#[tokio::test]
async fn parcel_flow_and_attribution() {
    let (r, clock) = setup();
    let (_, rec) = call(&r, "POST", "/aliases", Some(json!({"true_address": john(), "merchant_domain": "shop.example", "validity_days": 10}))).await;
    let handle = rec["handle"].as_str().unwrap().to_string();

    let (s, p) = call(&r, "POST", "/parcels/intake", Some(json!({"sender": "shop.example", "label": rec["alias_address"]}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(p["state"], "AtCarrier");
    let id = p["parcel_id"].as_str().unwrap().to_string();
    call(&r, "POST", &format!("/parcels/{id}/dispatch"), None).await;
    let (s, d) = call(&r, "POST", &format!("/parcels/{id}/deliver"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(d["state"], "Delivered");

    let (_, merchant) = call(&r, "GET", &format!("/parcels/{id}/tracking?viewer=merchant"), None).await;
    assert_eq!(merchant["destination"], rec["alias_address"]);
    assert!(merchant["short_code"].is_null());
    assert!(!merchant.to_string().to_uppercase().contains("123 MAIN STREET"));
    let (_, customer) = call(&r, "GET", &format!("/parcels/{id}/tracking?viewer=customer"), None).await;
    assert_eq!(customer["short_code"], rec["short_code"]);
    assert_eq!(customer["destination"]["line1"], "123 Main Street");

    clock.advance(Duration::days(11));
    let (_, ad) = call(&r, "POST", "/parcels/intake", Some(json!({"sender": "ads.example", "label": rec["alias_address"]}))).await;
    assert_eq!(ad["state"], "Refused");
    let ad_id = ad["parcel_id"].as_str().unwrap().to_string();
    let (_, back) = call(&r, "POST", &format!("/parcels/{ad_id}/return"), None).await;
    assert_eq!(back["state"], "ReturnedToMerchant");

    let (s, att) = call(&r, "GET", &format!("/aliases/{handle}/attribution"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(att["attribution"], "merchant");
    assert_eq!(att["merchant_domain"], "shop.example");
    assert_eq!(att["refused_parcels"][0]["sender"], "ads.example");
    assert_eq!(att["refused_parcels"][0]["reason"], "Expired");

    let (s, _) = call(&r, "POST", &format!("/parcels/{id}/deliver"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn tampered_alias_label_is_rejected_at_intake() {
    let (r, _) = setup();
    let (_, rec) = call(&r, "POST", "/aliases", Some(json!({"true_address": john()}))).await;
    let mut label = rec["alias_address"].clone();
    let line2 = label["line2"].as_str().unwrap().to_string();
    let last = line2.chars().last().unwrap();
    let swapped = if last == '0' { '1' } else { '0' };
    label["line2"] = json!(format!("{}{swapped}", &line2[..line2.len() - 1]));
    let (s, v) = call(&r, "POST", "/parcels/intake", Some(json!({"sender": "x", "label": label}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("manual handling"));
}
