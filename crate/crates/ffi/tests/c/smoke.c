#include <math.h>
#include <stdio.h>
#include "qscramble.h"

#define CHECK(x)                                                        \
    do {                                                                \
        if (!(x)) {                                                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #x, \
                    qs_last_error_message());                           \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    QsFloquetParams params = {9, 1.5707963267948966, 1.5707963267948966, 2.0420352248333655,
                              QS_BOUNDARY_OPEN};
    size_t seeds[2] = {8, 9};
    size_t count = 0;
    CHECK(qs_lightcone_count(&params, 4, seeds, 2, &count) == QS_STATUS_OK);
    CHECK(count == 20);

    double p = 0, f = 0;
    CHECK(qs_haar_baseline(2, 4, &p, &f) == QS_STATUS_OK);
    CHECK(p > 0.0 && f > 0.0);

    QsState *s = NULL;
    CHECK(qs_state_new_zero(3, &s) == QS_STATUS_OK);
    CHECK(qs_state_n_qubits(s) == 3);
    params.n_sites = 3;
    CHECK(qs_state_floquet_evolve(s, &params, 2, false, 0) == QS_STATUS_OK);
    CHECK(qs_state_floquet_evolve_inverse(s, &params, 2, 0) == QS_STATUS_OK);
    QsComplex amps[8];
    CHECK(qs_state_copy_amplitudes(s, amps, 8) == QS_STATUS_OK);
    CHECK(fabs(amps[0].re - 1.0) < 1e-12);
    CHECK(qs_state_copy_amplitudes(s, amps, 4) == QS_STATUS_INVALID_ARGUMENT);
    qs_state_free(s);

    CHECK(qs_state_new_zero(40, &s) == QS_STATUS_CAPACITY);
    printf("ok %s\n", qs_version());
    return 0;
}
