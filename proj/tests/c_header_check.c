/* Compiles the public header as C99 and exercises a few calls. */
#include <stdio.h>

#include "permfit/permfit.h"

int main(void) {
  pf_permutation* p = NULL;
  uint64_t inv = 0;
  const int32_t v[] = {2, 3, 1};
  if (pf_permutation_create(v, 3, &p) != PF_OK) return 1;
  if (pf_inversions(p, &inv) != PF_OK || inv != 2) return 1;
  pf_permutation_destroy(p);
  if (pf_permutation_create(v, 0, NULL) != PF_ERR_ARG) return 1;
  printf("%s\n", pf_status_name(PF_OK));
  return 0;
}
