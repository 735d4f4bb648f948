/* The public header must compile as plain C. */
#include "hlucb/hlucb.h"

int hlucb_header_check_default_sigma(void) {
  hlucb_config c;
  hlucb_config_init(&c);
  return c.sigma == 0.1 && c.radius_constant == 1.0;
}
