"""Policy-regulated agent actions over the Slick policy language."""
