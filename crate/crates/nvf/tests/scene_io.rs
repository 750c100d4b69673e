use std::fs;

use nvf::scene_file::load_scene;
use nvf::Error;

const CAMERA: &str = r#""camera": {"position": [0,0,3], "look_at": [0,0,0], "fov_degrees": 40, "width": 4, "height": 4}"#;

#[test]
fn scene_with_referenced_obj() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("meshes")).unwrap();
    fs::write(
        dir.path().join("meshes/quad.obj"),
        "v -1 -1 0\nv 1 -1 0\nv 1 1 0\nv -1 1 0\nf 1 2 3\nf 1 3 4\n",
    )
    .unwrap();
    let text = format!(
        r#"{{"mesh": "meshes/quad.obj", "materials": [{{"albedo": [0.5,0.5,0.5]}}, {{"albedo": [0,0,0], "emission": [1,1,1]}}],
            "face_materials": [0, 1], {CAMERA}}}"#
    );
    let path = dir.path().join("scene.json");
    fs::write(&path, text).unwrap();
    let scene = load_scene(&path).unwrap();
    assert_eq!(scene.mesh.vertex_count(), 4);
    assert_eq!(scene.lights, vec![1]);
}

#[test]
fn quad_in_referenced_obj_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("q.obj"), "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
    let path = dir.path().join("scene.json");
    fs::write(&path, format!(r#"{{"mesh": "q.obj", "materials": [{{"albedo": [1,1,1]}}], {CAMERA}}}"#)).unwrap();
    let err = load_scene(&path).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_obj_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    fs::write(&path, format!(r#"{{"mesh": "nope.obj", "materials": [{{"albedo": [1,1,1]}}], {CAMERA}}}"#)).unwrap();
    assert!(matches!(load_scene(&path).unwrap_err(), Error::Io { .. }));
}

#[test]
fn invalid_material_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    let text = format!(
        r#"{{"mesh": {{"vertices": [[0,0,0],[1,0,0],[0,1,0]], "faces": [[0,1,2]]}},
            "materials": [{{"albedo": [1.5,0,0]}}], {CAMERA}}}"#
    );
    fs::write(&path, text).unwrap();
    assert_eq!(load_scene(&path).unwrap_err().exit_code(), 2);
}
