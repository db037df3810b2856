/* Minimal C client. Build against the static library, e.g.
 *   cc -I crates/ffi/include crates/ffi/examples/smoke.c \
 *      target/release/libwiretap_bounds_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <stdio.h>

#include "wiretap_bounds.h"

static int check(WtStatus status) {
    if (status != WT_STATUS_OK) {
        const char *msg = wt_last_error();
        fprintf(stderr, "error %d: %s\n", (int)status, msg ? msg : "(none)");
        return 1;
    }
    return 0;
}

int main(void) {
    double lower = 0.0, upper = 0.0;
    if (check(wt_lower_bound(0.7, 1e-3, WT_UNIT_BITS, &lower))) return 1;
    if (check(wt_upper_bound(0.7, 1e-3, WT_UNIT_BITS, &upper))) return 1;
    printf("L = %.12e bits, U = %.12e bits\n", lower, upper);

    WtMatrix *u = NULL;
    WtSpectrum *spectrum = NULL;
    double residual = 0.0;
    if (check(wt_matrix_haar(6, 1, &u))) return 1;
    if (check(wt_mode_decompose(u, 3, 3, 3, &spectrum, &residual))) return 1;
    double etas[3];
    if (check(wt_spectrum_values(spectrum, etas, 3))) return 1;
    printf("etas = %.6f %.6f %.6f (residual %.1e)\n", etas[0], etas[1], etas[2], residual);

    WtAllocation *allocation = NULL;
    double value = 0.0;
    if (check(wt_allocate(spectrum, 1.0, WT_BOUND_LOWER, 1e-10, &allocation))) return 1;
    if (check(wt_allocation_value(allocation, WT_UNIT_BITS, &value))) return 1;
    printf("allocated lower bound = %.12e bits\n", value);

    WtEnsemble *ensemble = NULL;
    WtEstimate est;
    if (check(wt_ensemble_haar_subblock(4, 2, 2, 7, &ensemble))) return 1;
    if (check(wt_monte_carlo_lower(ensemble, 1.0, 1000, &est))) return 1;
    printf("Monte Carlo mean = %.6f +- %.6f nats\n", est.mean, est.std_error);

    if (wt_lower_bound(2.0, 1.0, WT_UNIT_NATS, &lower) != WT_STATUS_DOMAIN) return 1;

    wt_ensemble_free(ensemble);
    wt_allocation_free(allocation);
    wt_spectrum_free(spectrum);
    wt_matrix_free(u);
    return 0;
}
