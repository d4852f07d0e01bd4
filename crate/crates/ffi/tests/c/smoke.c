#include <stdio.h>
#include <string.h>
#include "mds53.h"

#define CHECK(expr) do { if ((expr) != MDS53_STATUS_OK) { \
    fprintf(stderr, "%s failed: %s\n", #expr, mds53_last_error_message()); return 1; } } while (0)

int main(void) {
    Mds53Code *code = NULL;
    Mds53Plan *plan = NULL;
    uint8_t message[6] = {3, 1, 0, 2, 2, 1};
    uint8_t cw[10];
    CHECK(mds53_code_new_canonical(&code));
    CHECK(mds53_encode_scalars(code, message, cw));

    for (uint8_t failed = 1; failed <= 5; failed++) {
        const size_t ss = 5;
        uint8_t blocks_in[6 * 5], blocks_cw[10 * 5], downloads[4 * 5], rebuilt[2 * 5];
        uint8_t helpers[4];
        for (size_t i = 0; i < sizeof blocks_in; i++) blocks_in[i] = (uint8_t)(i * 29 + failed);
        CHECK(mds53_encode_blocks(code, blocks_in, ss, blocks_cw));
        CHECK(mds53_plan_new(code, failed, &plan));
        CHECK(mds53_plan_helpers(plan, helpers));
        for (int k = 0; k < 4; k++)
            CHECK(mds53_plan_helper_symbol_blocks(plan, helpers[k],
                  blocks_cw + (helpers[k] - 1) * 2 * ss, ss, downloads + k * ss));
        CHECK(mds53_plan_execute_blocks(plan, downloads, ss, rebuilt));
        if (memcmp(rebuilt, blocks_cw + (failed - 1) * 2 * ss, 2 * ss) != 0) {
            fprintf(stderr, "node %u rebuilt wrong\n", failed);
            return 1;
        }
        mds53_plan_free(plan);
    }

    if (mds53_plan_new(code, 9, &plan) != MDS53_STATUS_INVALID_ARGUMENT) return 1;
    if (strlen(mds53_last_error_message()) == 0) return 1;
    mds53_code_free(code);
    printf("ok\n");
    return 0;
}
