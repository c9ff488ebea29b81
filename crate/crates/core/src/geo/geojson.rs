//! Spatial units as a GeoJSON FeatureCollection of Polygon / MultiPolygon
//! features carrying `{id, area_km2}` properties.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::{GeoError, Result, SpatialUnit};
use crate::Real;

fn gj(msg: impl Into<String>) -> GeoError {
    GeoError::GeoJson(msg.into())
}

fn parse_ring<T: Real>(v: &Value) -> Result<Vec<(T, T)>> {
    v.as_array()
        .ok_or_else(|| gj("ring is not an array"))?
        .iter()
        .map(|p| {
            let pair = p
                .as_array()
                .filter(|a| a.len() >= 2)
                .ok_or_else(|| gj("bad position"))?;
            let lon = pair[0]
                .as_f64()
                .ok_or_else(|| gj("non-numeric longitude"))?;
            let lat = pair[1].as_f64().ok_or_else(|| gj("non-numeric latitude"))?;
            Ok((T::lit(lon), T::lit(lat)))
        })
        .collect()
}

fn parse_rings<T: Real>(v: &Value) -> Result<Vec<Vec<(T, T)>>> {
    v.as_array()
        .ok_or_else(|| gj("polygon coordinates are not an array"))?
        .iter()
        .map(parse_ring)
        .collect()
}

/// Parses a FeatureCollection into units, in file order.
pub fn parse_units<T: Real>(text: &str) -> Result<Vec<SpatialUnit<T>>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| gj(e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(gj("top level must be a FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| gj("missing features array"))?;
    let mut units = Vec::with_capacity(features.len());
    for (k, f) in features.iter().enumerate() {
        let props = f
            .get("properties")
            .ok_or_else(|| gj(format!("feature {k}: no properties")))?;
        let id = match props.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(gj(format!("feature {k}: missing id"))),
        };
        let area = props
            .get("area_km2")
            .and_then(Value::as_f64)
            .ok_or_else(|| gj(format!("feature {k} ({id}): missing area_km2")))?;
        let geom = f
            .get("geometry")
            .ok_or_else(|| gj(format!("feature {k} ({id}): no geometry")))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| gj(format!("feature {k}: no coordinates")))?;
        let rings = match geom.get("type").and_then(Value::as_str) {
            Some("Polygon") => parse_rings(coords)?,
            Some("MultiPolygon") => {
                let mut all = Vec::new();
                for poly in coords.as_array().ok_or_else(|| gj("bad MultiPolygon"))? {
                    all.extend(parse_rings(poly)?);
                }
                all
            }
            other => {
                return Err(gj(format!(
                    "feature {k} ({id}): unsupported geometry {other:?}"
                )))
            }
        };
        units.push(SpatialUnit::new(id, rings, T::lit(area))?);
    }
    Ok(units)
}

pub fn read_units<T: Real>(path: &Path) -> Result<Vec<SpatialUnit<T>>> {
    let text = fs::read_to_string(path).map_err(|source| GeoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_units(&text).map_err(|e| match e {
        GeoError::GeoJson(m) => GeoError::GeoJson(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Polygon features with explicitly closed rings.
pub fn units_to_geojson<T: Real>(units: &[SpatialUnit<T>]) -> Value {
    let features: Vec<Value> = units
        .iter()
        .map(|u| {
            let rings: Vec<Vec<[f64; 2]>> = u
                .rings()
                .iter()
                .map(|r| {
                    let mut pts: Vec<[f64; 2]> =
                        r.iter().map(|(x, y)| [x.as_f64(), y.as_f64()]).collect();
                    if pts.first() != pts.last() {
                        pts.push(pts[0]);
                    }
                    pts
                })
                .collect();
            json!({
                "type": "Feature",
                "properties": { "id": u.id(), "area_km2": u.area_km2().as_f64() },
                "geometry": { "type": "Polygon", "coordinates": rings },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn write_units<T: Real>(units: &[SpatialUnit<T>], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&units_to_geojson(units)).expect("json");
    text.push('\n');
    fs::write(path, text).map_err(|source| GeoError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_and_multipolygon() {
        let text = r#"{"type":"FeatureCollection","features":[
          {"type":"Feature","properties":{"id":"a","area_km2":2.5},
           "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
          {"type":"Feature","properties":{"id":7,"area_km2":1},
           "geometry":{"type":"MultiPolygon","coordinates":[[[[2,0],[3,0],[3,1],[2,0]]],[[[5,5],[6,5],[6,6]]]]}}
        ]}"#;
        let units: Vec<SpatialUnit<f64>> = parse_units(text).unwrap();
        assert_eq!(units[0].id(), "a");
        assert_eq!(units[0].area_km2(), 2.5);
        assert_eq!(units[1].id(), "7");
        assert_eq!(units[1].rings().len(), 2);
        assert!(units[1].contains((5.9, 5.5)));
    }

    #[test]
    fn round_trip() {
        let u = SpatialUnit::rectangle("x", [73.0, 33.5, 73.0625, 33.5625], 12.0).unwrap();
        let back: Vec<SpatialUnit<f64>> = parse_units(
            &serde_json::to_string(&units_to_geojson(std::slice::from_ref(&u))).unwrap(),
        )
        .unwrap();
        assert_eq!(back[0].id(), "x");
        assert_eq!(back[0].bbox(), u.bbox());
    }

    #[test]
    fn missing_area_is_reported() {
        let text = r#"{"type":"FeatureCollection","features":[
          {"type":"Feature","properties":{"id":"a"},
           "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1]]]}}]}"#;
        let e = parse_units::<f64>(text).unwrap_err();
        assert!(e.to_string().contains("area_km2"));
    }
}
