"""Frequency-sampling taps of the low-OOB (type-II style) prototype pair.

Tap ``i`` (``i = -12 .. 12``) weights ``exp(j*2*pi*i*(n + 1/2)/N)``.  The pair was
obtained offline (``scripts/design_type2.py``) by maximising the
signal-to-self-interference ratio subject to an aggregate out-of-band
density near -44 dB from 1.375 subcarrier spacings beyond the band edge,
whichever bank carries the edge subcarriers (L = 4, two banks).  The taps
are independent of M.
"""

TYPE2_BANK0_TAPS = (
    complex(-0.00012117, +0.00035066),
    complex(-0.00240536, +0.00052199),
    complex(+0.00053662, +0.00419458),
    complex(+0.00227277, -0.00169084),
    complex(+0.00341159, +0.00021902),
    complex(-0.02867026, +0.01074845),
    complex(+0.32674478, -0.02040149),
    complex(-0.19647340, -0.04530028),
    complex(-0.17556691, -0.04578974),
    complex(-0.17984362, +0.00503659),
    complex(+0.34901792, -0.43896286),
    complex(-0.74660828, +0.60687535),
    complex(+1.00000000, -0.00000000),
    complex(-0.94697524, +0.17489951),
    complex(+0.52925787, +0.13104017),
    complex(+0.00944026, -0.22216539),
    complex(+0.08837772, -0.03752077),
    complex(+0.26195109, -0.03558285),
    complex(-0.31626370, -0.05465901),
    complex(+0.02583964, +0.01338052),
    complex(-0.00100041, -0.00222926),
    complex(-0.00268595, -0.00186297),
    complex(+0.00160656, +0.00273790),
    complex(-0.00490888, +0.00171002),
    complex(-0.00219292, +0.00012512),
)
TYPE2_BANK1_TAPS = (
    complex(-0.00016020, +0.00061435),
    complex(-0.00254488, +0.00045533),
    complex(+0.00096306, +0.00444663),
    complex(+0.00242272, -0.00202394),
    complex(+0.00373335, +0.00037965),
    complex(-0.02900109, +0.00847378),
    complex(+0.33794570, -0.01162300),
    complex(-0.23467439, -0.05602340),
    complex(-0.09608447, -0.01987664),
    complex(-0.24436839, +0.01061483),
    complex(+0.34314580, -0.45187420),
    complex(-0.73536701, +0.62387279),
    complex(+1.00000000, +0.00000000),
    complex(-0.95544026, +0.12050483),
    complex(+0.52231313, +0.13964157),
    complex(+0.01097143, -0.18119193),
    complex(+0.16712029, -0.07108586),
    complex(+0.20112369, -0.03078535),
    complex(-0.31315985, -0.04555376),
    complex(+0.02657455, +0.01198222),
    complex(-0.00106981, -0.00227896),
    complex(-0.00273926, -0.00180897),
    complex(+0.00080186, +0.00332579),
    complex(-0.00479132, +0.00137546),
    complex(-0.00212516, +0.00002165),
)
