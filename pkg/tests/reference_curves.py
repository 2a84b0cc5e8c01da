"""Reference curves on the standard probe grid (t = 1 plus every 50).

Mean HFR and downstream probe accuracy for features rendered at three
resolutions, used as ground-truth fixtures: a correct pipeline must select
t = 1 at 256, t = 50 at 512, and t = 150 at 1024, and the 512 HFR/accuracy
pair must correlate strongly under Spearman rank correlation.
"""

PROBE_TIMESTEPS = (
    1, 50, 100, 150, 200, 250, 300, 350, 400, 450,
    500, 550, 600, 650, 700, 750, 800, 850, 900, 950, 1000,
)

HFR_BY_RESOLUTION = {
    256: (
        0.6163, 0.6131, 0.6110, 0.6092, 0.6077, 0.6059, 0.6045, 0.6031,
        0.6020, 0.6011, 0.5998, 0.5987, 0.5977, 0.5962, 0.5943, 0.5916,
        0.5889, 0.5857, 0.5824, 0.5711, 0.5720,
    ),
    512: (
        0.6199, 0.6223, 0.6221, 0.6217, 0.6212, 0.6200, 0.6201, 0.6186,
        0.6171, 0.6155, 0.6138, 0.6123, 0.6112, 0.6100, 0.6090, 0.6075,
        0.6063, 0.6042, 0.6013, 0.5946, 0.5870,
    ),
    1024: (
        0.6180, 0.6195, 0.6208, 0.6234, 0.6164, 0.6144, 0.6128, 0.6111,
        0.6096, 0.6082, 0.6067, 0.6055, 0.6048, 0.6039, 0.6034, 0.6025,
        0.6019, 0.6000, 0.5959, 0.5851, 0.5789,
    ),
}

ACCURACY_BY_RESOLUTION = {
    256: (
        71.5, 69.3, 68.2, 62.0, 61.3, 57.8, 46.5, 34.0, 27.5, 26.2,
        14.3, 14.5, 11.7, 7.3, 5.7, 4.3, 3.5, 2.0, 1.7, 1.2, 1.2,
    ),
    512: (
        72.3, 78.6, 77.9, 75.0, 72.2, 67.3, 63.9, 64.8, 63.6, 57.7,
        37.2, 27.2, 27.5, 19.8, 15.5, 12.3, 8.0, 4.2, 2.0, 1.3, 0.8,
    ),
    1024: (
        65.2, 66.2, 67.8, 74.8, 69.7, 72.4, 70.0, 63.3, 68.2, 53.3,
        52.0, 51.7, 46.2, 36.3, 38.7, 24.4, 16.8, 11.1, 8.2, 2.7, 0.8,
    ),
}

EXPECTED_SELECTION = {256: 1, 512: 50, 1024: 150}
