#include <math.h>
#include <stdio.h>
#include <string.h>

#include "chainsynth.h"

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,      \
                    chainsynth_last_error());                           \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    ChainsynthController *ctl = NULL;
    CHECK(chainsynth_synthesize(3, "1", "-45", "1", NULL, &ctl) == CHAINSYNTH_STATUS_OK);
    CHECK(chainsynth_controller_dimension(ctl) == 3);

    double x1 = 11.0 / 41.0;
    double x[3] = {x1, -41.0 * x1 * x1 / 121.0, 0.0};
    double theta = 0.0, u = 0.0, t = 0.0;
    CHECK(chainsynth_theta(ctl, x, 3, &theta) == CHAINSYNTH_STATUS_OK);
    CHECK(fabs(theta - 1.0) < 1e-12);
    CHECK(chainsynth_control(ctl, x, 3, &u) == CHAINSYNTH_STATUS_OK);
    CHECK(fabs(u + 1.0) < 1e-12);
    CHECK(chainsynth_time_of_motion(ctl, x, 3, 0.0, 0.0, &t) == CHAINSYNTH_STATUS_OK);
    CHECK(fabs(t - 1.0) < 1e-4);
    CHECK(chainsynth_theta(ctl, x, 2, &theta) == CHAINSYNTH_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(chainsynth_last_error()) > 0);

    char *xi0 = NULL;
    CHECK(chainsynth_xi0(4, &xi0) == CHAINSYNTH_STATUS_OK);
    CHECK(strcmp(xi0, "9/20") == 0);
    chainsynth_string_free(xi0);

    ChainsynthController *bad = NULL;
    CHECK(chainsynth_synthesize(3, "1", "0", "1", NULL, &bad) == CHAINSYNTH_STATUS_VALIDATION_FAILED);
    CHECK(bad == NULL);

    chainsynth_controller_free(ctl);
    puts("ok");
    return 0;
}
