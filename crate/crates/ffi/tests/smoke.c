#include <stdio.h>
#include <string.h>
#include "hyperpath.h"

int main(void) {
    const uint32_t faults[] = {3, 12, 21};
    const uint32_t sources[] = {0, 24};
    const uint32_t sinks[] = {1, 28};
    HpInstance *inst = NULL;
    if (hp_instance_new(5, faults, 3, sources, sinks, 2, &inst) != HP_STATUS_OK) {
        fprintf(stderr, "instance: %s\n", hp_last_error_message());
        return 1;
    }
    HpResult *res = NULL;
    if (hp_route(inst, 0, 0, &res) != HP_STATUS_OK) {
        fprintf(stderr, "route: %s\n", hp_last_error_message());
        return 2;
    }
    size_t total = 0;
    for (size_t i = 0; i < hp_result_path_count(res); i++) {
        uint32_t buf[32];
        total += hp_result_path(res, i, buf, 32);
    }
    int ok = hp_result_verified(res) && total == hp_result_coverage(res) && total >= 26;
    printf("coverage %zu bound %zu\n", hp_result_coverage(res), hp_result_bound(res));

    HpInstance *bad = NULL;
    HpStatus st = hp_instance_from_json("{\"n\": 2, \"k\": 1, \"faults\": [], \"sources\": [\"012\"], \"sinks\": [1]}", &bad);
    ok = ok && st == HP_STATUS_PARSE && strlen(hp_last_error_message()) > 0;

    hp_result_free(res);
    hp_instance_free(inst);
    return ok ? 0 : 3;
}
