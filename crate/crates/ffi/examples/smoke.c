/* Build: cc smoke.c -I../include ../../../target/release/libheadland_smooth_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include "headland_smooth.h"

int main(void) {
    hs_config *cfg = hs_config_new();
    double r = 0.0;
    if (hs_min_turning_radius(cfg, &r) != HS_STATUS_OK) return 1;
    printf("minimum turning radius %.4f m\n", r);
    double xy[] = {0, 0, 200, 0, 200, 200, 0, 200};
    hs_config_set(cfg, "raster_cell_m", "1");
    hs_run *run = NULL;
    if (hs_run_contour(cfg, xy, 4, &run) != HS_STATUS_OK) {
        char msg[256];
        hs_last_error(msg, sizeof msg);
        fprintf(stderr, "error: %s\n", msg);
        return 1;
    }
    printf("%zu instances, %zu failed\n", (size_t)hs_run_instances(run), (size_t)hs_run_failures(run));
    hs_run_free(run);
    hs_config_free(cfg);
    return 0;
}
