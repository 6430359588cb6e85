#include <stdio.h>
#include <string.h>
#include "baerkit.h"

static const char *D8 =
    "group A\n gen a\n rel a^4\nend\n"
    "group B\n gen b\n rel b^2\nend\n"
    "action B on A\n b : a -> a^-1\nend\n";

int main(void) {
    BkInput *in = NULL;
    if (bk_input_parse(D8, &in) != BK_OK) return 10;
    BkInvariants *g = NULL, *b = NULL, *comp = NULL;
    if (bk_semidirect_verify(in, 1, 0, 0, &g, &b, &comp) != BK_OK) return 11;
    char *t = bk_invariants_torsion_string(g);
    int ok = strcmp(t, "2") == 0 && bk_invariants_free_rank(g) == 0;
    printf("G torsion=%s\n", t);
    bk_string_free(t);
    bk_invariants_free(g);
    bk_invariants_free(b);
    bk_invariants_free(comp);
    bk_input_free(in);
    if (bk_witt_dimension(3, 3) != 8) return 12;
    return ok ? 0 : 13;
}
