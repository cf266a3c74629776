use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdgcnn::container::PrecomputeContainer;
use mdgcnn::conv::{write_signal_csv, Signal};
use mdgcnn::mesh::io::write_off;
use mdgcnn::mesh::primitives;
use tempfile::TempDir;

fn mdgcnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdgcnn")).args(["--threads", "1"]).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        write_off(&primitives::icosphere(2), &dir.path().join("sphere.off")).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn precompute(&self, name: &str, levels: &str) -> Output {
        let (mesh, out) = (self.path("sphere.off"), self.path(name));
        mdgcnn(&[
            "precompute",
            "--mesh",
            s(&mesh),
            "--nrho",
            "2",
            "--ntheta",
            "6",
            "--radius",
            "0.35",
            "--levels",
            levels,
            "--out",
            s(&out),
        ])
    }
}

#[test]
fn precompute_is_deterministic_and_verifies() {
    let f = Fixture::new();
    assert_eq!(code(&f.precompute("a.mdgc", "1")), 0);
    assert_eq!(code(&f.precompute("b.mdgc", "1")), 0);
    assert_eq!(fs::read(f.path("a.mdgc")).unwrap(), fs::read(f.path("b.mdgc")).unwrap());
    let o = mdgcnn(&["verify", "--pre", s(&f.path("a.mdgc"))]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("PASS") && !text.contains("FAIL"));

    assert_eq!(code(&f.precompute("single.mdgc", "0")), 0);
    let c = PrecomputeContainer::read(fs::read(f.path("single.mdgc")).unwrap().as_slice()).unwrap();
    assert_eq!(c.levels.len(), 1);
}

#[test]
fn corrupted_weights_fail_verification() {
    let f = Fixture::new();
    assert_eq!(code(&f.precompute("a.mdgc", "0")), 0);
    let mut c = PrecomputeContainer::read(fs::read(f.path("a.mdgc")).unwrap().as_slice()).unwrap();
    let k = c.levels[0].windows.valid.iter().position(|&v| v).unwrap();
    c.levels[0].windows.weight[3 * k] += 0.25;
    fs::write(f.path("bad.mdgc"), c.to_bytes()).unwrap();
    let o = mdgcnn(&["verify", "--pre", s(&f.path("bad.mdgc"))]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL L0 barycentric"));
}

#[test]
fn mesh_errors_exit_2() {
    let f = Fixture::new();
    fs::write(f.path("broken.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n").unwrap();
    let o = mdgcnn(&[
        "precompute",
        "--mesh",
        s(&f.path("broken.off")),
        "--nrho",
        "2",
        "--ntheta",
        "6",
        "--radius",
        "0.3",
        "--out",
        s(&f.path("x")),
    ]);
    assert_eq!(code(&o), 2);
    let o = mdgcnn(&[
        "precompute",
        "--mesh",
        s(&f.path("missing.obj")),
        "--nrho",
        "2",
        "--ntheta",
        "6",
        "--radius",
        "0.3",
        "--out",
        s(&f.path("x")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn train_predict_round_trip() {
    let f = Fixture::new();
    assert_eq!(code(&f.precompute("pre.mdgc", "0")), 0);
    let pre = f.path("pre.mdgc");
    let data = f.path("data.mdgd");
    assert_eq!(
        code(&mdgcnn(&["make-dataset", "--pre", s(&pre), "--samples", "6", "--seed", "1", "--out", s(&data)])),
        0
    );
    let arch = f.path("arch.cfg");
    fs::write(
        &arch,
        "arch = resnet\nstacks = 1\nblocks = 0\nfilters = 2\nin_channels = 1\nclasses = 2\nn_rho = 2\nn_theta = 6\n",
    )
    .unwrap();
    let train = |out: &str, epochs: &str, model: &str| {
        let out = f.path(out);
        let o = mdgcnn(&[
            "train",
            "--pre",
            s(&pre),
            "--data",
            s(&data),
            "--arch",
            s(&arch),
            "--model",
            model,
            "--epochs",
            epochs,
            "--seed",
            "4",
            "--batch-size",
            "3",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.with_extension("csv")).unwrap()
    };
    let a = train("a.ckpt", "2", "mdgcnn");
    assert_eq!(a, train("b.ckpt", "2", "mdgcnn"));
    assert_eq!(a.lines().count(), 3);
    assert!(a.starts_with("epoch,loss,accuracy\n"));
    assert_eq!(train("g.ckpt", "0", "gcnn").lines().count(), 1);

    let signal = f.path("signal.csv");
    let x = Signal::from_fn(162, 1, |v, c| ((v * 7 + c) % 5) as f64 / 5.0);
    write_signal_csv(&x, fs::File::create(&signal).unwrap()).unwrap();
    let out = f.path("pred.csv");
    assert_eq!(
        code(&mdgcnn(&[
            "predict",
            "--pre",
            s(&pre),
            "--model",
            s(&f.path("a.ckpt")),
            "--signal",
            s(&signal),
            "--out",
            s(&out)
        ])),
        0
    );
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 163);
    assert!(text.starts_with("vertex,label,p0,p1\n"));
    let ply = f.path("pred.ply");
    assert_eq!(
        code(&mdgcnn(&[
            "predict",
            "--pre",
            s(&pre),
            "--model",
            s(&f.path("g.ckpt")),
            "--signal",
            s(&signal),
            "--out",
            s(&ply)
        ])),
        0
    );
    assert!(fs::read_to_string(&ply).unwrap().contains("element vertex 162"));

    // wrong channel count
    let bad = f.path("bad.csv");
    write_signal_csv(&Signal::zeros(162, 3), fs::File::create(&bad).unwrap()).unwrap();
    assert_eq!(
        code(&mdgcnn(&[
            "predict",
            "--pre",
            s(&pre),
            "--model",
            s(&f.path("a.ckpt")),
            "--signal",
            s(&bad),
            "--out",
            s(&out)
        ])),
        4
    );
    // window layout differs from the container
    fs::write(
        &arch,
        "arch = resnet\nstacks = 1\nblocks = 0\nfilters = 2\nin_channels = 1\nclasses = 2\nn_rho = 2\nn_theta = 8\n",
    )
    .unwrap();
    let o = mdgcnn(&[
        "train",
        "--pre",
        s(&pre),
        "--data",
        s(&data),
        "--arch",
        s(&arch),
        "--epochs",
        "1",
        "--out",
        s(&f.path("c.ckpt")),
    ]);
    assert_eq!(code(&o), 4);
}

#[test]
fn dirac_demo_writes_ply_and_csv() {
    let f = Fixture::new();
    assert_eq!(code(&f.precompute("pre.mdgc", "0")), 0);
    let stem = f.path("dirac");
    let o = mdgcnn(&[
        "demo-dirac",
        "--pre",
        s(&f.path("pre.mdgc")),
        "--t",
        "0.23",
        "--n",
        "2",
        "--mode",
        "geo",
        "--out",
        s(&stem),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(stem.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 163);
    assert!(csv.starts_with("radius,response\n0,"));
    assert!(fs::read_to_string(stem.with_extension("ply")).unwrap().starts_with("ply"));
    let o = mdgcnn(&["demo-dirac", "--pre", s(&f.path("pre.mdgc")), "--t", "0.23", "--n", "0", "--out", s(&stem)]);
    assert_eq!(code(&o), 4);
}
