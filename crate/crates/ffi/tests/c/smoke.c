#include <stdio.h>
#include <string.h>

#include "catk.h"

int main(void) {
    CatkScenario *sc = NULL;
    if (catk_scenario_example("cone", &sc) != CATK_STATUS_OK) {
        fprintf(stderr, "example: %s\n", catk_last_error());
        return 10;
    }
    char *hash = NULL;
    if (catk_scenario_hash(sc, &hash) != CATK_STATUS_OK || strlen(hash) != 64) {
        return 11;
    }
    CatkReport *r = NULL;
    if (catk_run(sc, &r) != CATK_STATUS_OK) {
        fprintf(stderr, "run: %s\n", catk_last_error());
        return 12;
    }
    int code = catk_report_exit_code(r);
    size_t failures = catk_report_failure_count(r);
    CatkScenario *bad = NULL;
    CatkStatus st = catk_scenario_from_json("{", &bad);
    printf("%s %d %zu %d\n", catk_version(), code, failures, (int)st);
    catk_string_free(hash);
    catk_report_free(r);
    catk_scenario_free(sc);
    return 0;
}
