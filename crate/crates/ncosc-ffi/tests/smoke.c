/* End-to-end check of the generated header and static library. */

#include <math.h>
#include <stdio.h>

#include "ncosc.h"

int main(void) {
    NcoscSystem *sys = NULL;
    NcoscStatus status = ncosc_system_new(1.0, 1.0, 0.1, 0.1, 1.0, 10, &sys);
    if (status != NCOSC_STATUS_OK) {
        fprintf(stderr, "system_new failed: %d\n", (int)status);
        return 1;
    }

    double e10 = 0.0;
    status = ncosc_energy_closed_form(sys, 1, 0, NCOSC_CONVENTION_HBAR_SCALED, &e10);
    if (status != NCOSC_STATUS_OK || fabs(e10 - 1.905) > 1e-12) {
        fprintf(stderr, "closed form mismatch: %.17g\n", e10);
        return 1;
    }

    double evs[3] = {0};
    uintptr_t written = 0;
    status = ncosc_spectrum_numerical(sys, 3, evs, 3, &written);
    if (status != NCOSC_STATUS_OK || written != 3) {
        fprintf(stderr, "spectrum failed: %d written=%zu\n", (int)status, (size_t)written);
        return 1;
    }
    if (fabs(evs[1] - e10) > 1e-6) {
        fprintf(stderr, "spectrum disagrees with closed form: %.17g vs %.17g\n", evs[1], e10);
        return 1;
    }

    ncosc_system_free(sys);
    printf("ok %s\n", ncosc_version());
    return 0;
}
