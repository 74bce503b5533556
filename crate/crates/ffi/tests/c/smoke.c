#include <math.h>
#include <stdio.h>
#include <string.h>

#include "maxmean.h"

static int failures = 0;

static void expect_close(const char *label, double got, double want, double tol) {
    if (!(fabs(got - want) <= tol)) {
        fprintf(stderr, "%s: got %.17g want %.17g\n", label, got, want);
        failures++;
    }
}

int main(void) {
    double v = 0.0;

    if (maxmean_quantile_inf(0.95, &v) != MAXMEAN_STATUS_OK) failures++;
    expect_close("quantile", v, 3.1534023932, 1e-9);

    if (maxmean_cdf_inf(v, &v) != MAXMEAN_STATUS_OK) failures++;
    expect_close("cdf round trip", v, 0.95, 1e-12);

    MaxmeanContext *ctx = maxmean_context_new(1e-12, 1000000);
    if (ctx == NULL) return 2;
    if (maxmean_cdf_inf_series(ctx, 2.0, &v) != MAXMEAN_STATUS_OK) failures++;
    expect_close("series", v, 0.7968121300200199, 1e-10);
    maxmean_context_free(ctx);

    if (maxmean_ruin_probability(0.0, 1.0, &v) != MAXMEAN_STATUS_SOLVENCY) failures++;
    if (strlen(maxmean_last_error_message()) == 0) failures++;

    MaxmeanPoly *a = maxmean_poly_closed_form(5);
    MaxmeanPoly *b = maxmean_poly_by_recursion(5);
    if (!maxmean_poly_equal(a, b)) failures++;
    maxmean_poly_free(a);
    maxmean_poly_free(b);

    if (failures == 0) printf("ok\n");
    return failures == 0 ? 0 : 1;
}
