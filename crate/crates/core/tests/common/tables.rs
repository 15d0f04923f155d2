//! Published numbers used as regression fixtures.

/// (dataset, algorithm, F1, precision, recall) in percent at tau = 0.05, 0.1, 0.2.
pub type MetricRow = (&'static str, &'static str, [f64; 3], [f64; 3], [f64; 3]);

pub const STAGE1: &[MetricRow] = &[
    (
        "MNIST",
        "CL-PBNR",
        [93.9, 94.2, 94.4],
        [92.6, 94.4, 94.9],
        [95.3, 93.9, 93.9],
    ),
    (
        "MNIST",
        "CL-MCD",
        [95.4, 95.2, 95.0],
        [96.2, 97.4, 97.5],
        [94.7, 93.2, 92.7],
    ),
    (
        "MNIST",
        "CL-MCD-E",
        [95.2, 94.6, 92.3],
        [94.9, 97.1, 97.4],
        [95.5, 92.2, 87.7],
    ),
    (
        "MNIST",
        "CL-MCD-Ens",
        [95.4, 95.5, 95.0],
        [95.3, 96.7, 97.2],
        [95.5, 94.2, 93.0],
    ),
    (
        "MNIST",
        "Alg. Ens (Agree.=2)",
        [96.1, 96.2, 95.9],
        [95.8, 97.4, 97.1],
        [96.4, 95.0, 94.8],
    ),
    (
        "MNIST",
        "Alg. Ens (Agree.=3)",
        [95.8, 94.9, 93.4],
        [97.2, 98.4, 98.7],
        [94.4, 91.7, 88.7],
    ),
    (
        "CIFAR-10",
        "CL-PBNR",
        [49.3, 56.1, 60.3],
        [33.7, 41.1, 47.7],
        [92.0, 88.4, 82.0],
    ),
    (
        "CIFAR-10",
        "CL-MCD",
        [61.2, 63.9, 63.4],
        [46.7, 51.0, 52.6],
        [88.8, 85.7, 80.0],
    ),
    (
        "CIFAR-10",
        "CL-MCD-E",
        [67.6, 71.5, 69.4],
        [55.7, 62.5, 62.0],
        [86.0, 83.5, 78.7],
    ),
    (
        "CIFAR-10",
        "CL-MCD-Ens",
        [53.0, 59.2, 62.3],
        [37.1, 44.1, 49.7],
        [92.8, 89.7, 83.3],
    ),
    (
        "CIFAR-10",
        "Alg. Ens (Agree.=2)",
        [61.2, 64.4, 64.4],
        [46.5, 51.3, 53.1],
        [89.5, 86.7, 81.8],
    ),
    (
        "CIFAR-10",
        "Alg. Ens (Agree.=3)",
        [64.0, 67.1, 66.1],
        [50.8, 56.2, 57.4],
        [86.5, 83.4, 77.9],
    ),
    (
        "CIFAR-100",
        "CL-PBNR",
        [24.4, 38.6, 53.4],
        [14.1, 24.5, 37.9],
        [89.6, 90.8, 90.6],
    ),
    (
        "CIFAR-100",
        "CL-MCD",
        [28.5, 42.7, 56.7],
        [17.1, 28.3, 41.9],
        [85.8, 87.1, 87.3],
    ),
    (
        "CIFAR-100",
        "CL-MCD-E",
        [32.5, 46.4, 59.0],
        [20.5, 32.7, 46.7],
        [77.4, 79.9, 80.3],
    ),
    (
        "CIFAR-100",
        "CL-MCD-Ens",
        [25.1, 39.4, 54.2],
        [14.6, 25.0, 38.2],
        [92.2, 93.6, 93.7],
    ),
    (
        "CIFAR-100",
        "Alg. Ens (Agree.=2)",
        [29.3, 43.5, 57.4],
        [17.6, 29.0, 42.5],
        [85.7, 87.2, 88.2],
    ),
    (
        "CIFAR-100",
        "Alg. Ens (Agree.=3)",
        [33.7, 47.8, 59.6],
        [21.9, 34.8, 48.9],
        [73.4, 76.2, 76.2],
    ),
    (
        "Tiny-ImageNet",
        "CL-PBNR",
        [22.5, 37.4, 55.1],
        [13.0, 24.0, 40.7],
        [82.5, 84.2, 85.2],
    ),
    (
        "Tiny-ImageNet",
        "CL-MCD",
        [24.6, 39.5, 57.5],
        [14.5, 26.0, 43.7],
        [81.2, 81.9, 84.2],
    ),
    (
        "Tiny-ImageNet",
        "CL-MCD-E",
        [27.2, 43.0, 61.3],
        [16.5, 29.6, 49.1],
        [76.6, 78.7, 81.7],
    ),
    (
        "Tiny-ImageNet",
        "CL-MCD-Ens",
        [23.8, 38.8, 57.1],
        [13.8, 25.1, 42.3],
        [85.3, 85.8, 87.8],
    ),
    (
        "Tiny-ImageNet",
        "Alg. Ens (Agree.=2)",
        [25.6, 40.9, 59.0],
        [15.2, 27.2, 45.2],
        [81.1, 82.5, 85.0],
    ),
    (
        "Tiny-ImageNet",
        "Alg. Ens (Agree.=3)",
        [29.0, 44.5, 61.1],
        [18.4, 32.5, 52.6],
        [67.9, 70.4, 72.9],
    ),
];

pub const CIFAR10: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

/// Softmax similarity of class airplane to the other nine classes, in
/// CIFAR10 order without airplane.
pub const AIRPLANE_SCORES: [f64; 9] = [
    0.004, 0.019, 0.007, 0.002, 0.000, 0.001, 0.002, 0.027, 0.010,
];

/// Observed CIFAR-10 transition frequencies at tau = 0.2, in percent.
pub const CIFAR10_TRANSITION: [[f64; 10]; 10] = [
    [80.3, 0.0, 9.9, 0.0, 0.0, 0.0, 0.0, 0.0, 9.9, 0.0],
    [0.0, 79.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 20.1],
    [0.0, 0.0, 80.4, 10.0, 9.7, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 78.9, 0.0, 21.1, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 19.3, 80.7, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 19.0, 0.0, 81.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 20.2, 0.0, 0.0, 79.8, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 6.7, 7.0, 6.6, 0.0, 79.7, 0.0, 0.0],
    [20.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 79.5, 0.0],
    [0.0, 20.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 79.9],
];

/// Mean initial accuracy and mean F1 per dataset (MNIST, CIFAR-10,
/// CIFAR-100, Tiny-ImageNet), in percent.
pub const ACCURACY_VS_F1: ([f64; 4], [f64; 4]) =
    ([98.8, 83.4, 64.8, 59.9], [94.9, 62.5, 42.9, 41.6]);

/// Mean F1 and mean final accuracy per algorithm, in percent.
pub const F1_VS_FINAL: ([f64; 6], [f64; 6]) = (
    [56.6, 60.3, 63.3, 58.3, 61.2, 63.1],
    [77.3, 77.8, 78.7, 77.7, 78.1, 78.6],
);
