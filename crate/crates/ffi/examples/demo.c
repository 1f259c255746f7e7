#include <stdio.h>
#include "qcm.h"

int main(void) {
    QcmStore *store = qcm_store_new();
    QcmReal4 a, b, sum;
    double value = 0.0;

    if (qcm_encode(store, 2.0, &a) != QCM_STATUS_OK ||
        qcm_encode(store, 3.0, &b) != QCM_STATUS_OK ||
        qcm_add(store, a, b, &sum) != QCM_STATUS_OK ||
        qcm_decode(store, sum, &value) != QCM_STATUS_OK) {
        fprintf(stderr, "error: %s\n", qcm_last_error_message());
        qcm_store_free(store);
        return 1;
    }
    printf("%.12f\n", value);

    if (qcm_add(store, a, b, &sum) != QCM_STATUS_CONSUMED_ENSEMBLE) {
        qcm_store_free(store);
        return 2;
    }
    qcm_store_free(store);
    return 0;
}
