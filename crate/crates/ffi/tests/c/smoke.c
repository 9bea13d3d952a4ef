#include <stdio.h>
#include <string.h>

#include "benchgate.h"

#define CHECK(call)                                                          \
  do {                                                                       \
    BgStatus s_ = (call);                                                    \
    if (s_ != BG_STATUS_OK) {                                                \
      fprintf(stderr, "%s failed: %d %s\n", #call, (int)s_,                  \
              bg_last_error_message());                                      \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(int argc, char **argv) {
  if (argc != 6) {
    fprintf(stderr, "usage: smoke APP MB1 MB2 MB3 MB4\n");
    return 2;
  }
  BgCallGraph *app = NULL;
  CHECK(bg_callgraph_load(argv[1], BG_GRAPH_FORMAT_AUTO, &app));
  const BgCallGraph *micros[4];
  BgCallGraph *owned[4];
  for (int i = 0; i < 4; i++) {
    CHECK(bg_callgraph_load(argv[i + 2], BG_GRAPH_FORMAT_AUTO, &owned[i]));
    micros[i] = owned[i];
  }
  BgSuite *suite = NULL;
  CHECK(bg_optimize(app, micros, 4, 1, 0, &suite));
  double relevance = 0.0;
  CHECK(bg_suite_practical_relevance(suite, &relevance));
  printf("%zu", bg_suite_len(suite));
  for (size_t i = 0; i < bg_suite_len(suite); i++) {
    printf(" %s", bg_suite_benchmark(suite, i));
  }
  printf(" %.2f\n", relevance);

  double base[] = {1.0, 1.0, 1.0, 1.0};
  double var[] = {1.1, 1.1, 1.1, 1.1};
  BgChangeInterval ci;
  CHECK(bg_bootstrap_flat(base, 4, var, 4, 200, 0.005, 1, &ci));
  printf("%.1f %d\n", ci.median_change_pct, ci.excludes_zero);

  if (bg_optimize(app, micros, 4, 0, 0, &suite) != BG_STATUS_INVALID_ARGUMENT) {
    return 1;
  }
  printf("%s\n", bg_last_error_message());

  bg_suite_free(suite);
  for (int i = 0; i < 4; i++) {
    bg_callgraph_free(owned[i]);
  }
  bg_callgraph_free(app);
  return 0;
}
